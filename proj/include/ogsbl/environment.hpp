#pragma once

#include "ogsbl/ddpg.hpp"
#include "ogsbl/unfolding.hpp"

namespace ogsbl {

struct EnvConfig {
  int max_layers = 15;
  double epsilon = 0.1;     // stop when the halting score drops to epsilon
  double eta_pen = 0.005;   // per-layer reward penalty
  double rho = 1.0;         // halting-cost regularizer
  double lambda_halt = 0.05;
  double discount = 0.95;
  double log_clip = 30.0;   // bound on log(alpha), log(gamma) features
};

/// Documented action box: every raw actor output lives in [-1, 1]. Scale
/// parameters decode log-uniformly (three decades per unit raw) so the
/// neutral action (all zeros) is mild: a, b in [ab_max*1e-6, ab_max],
/// step_beta in [resolution*1e-6, resolution], and c1 on the negative
/// branch [-c1_scale, -c1_scale*1e-6]. The complex blocks map onto scaled
/// symmetric boxes, with W1 centered on the steering-derivative operator,
/// so a neutral action reproduces a plain SBL-style layer.
struct ActionScales {
  double ab_max = 1.0;
  double c1_scale = 10.0;
  double w1_scale = 1.0;
  double b1_scale = 0.2;
  double w2_scale = 0.5;
  double b2_scale = 0.5;
  double b3_scale = 0.2;
  double o1_scale = 0.01;
  double o2_scale = 0.02;
};

/// Per-component map from the raw action vector to the layer-parameter
/// layout: affine for symmetric boxes, log-scale for positive quantities.
class ActionMapper {
 public:
  ActionMapper() = default;
  ActionMapper(const ParamCodec& codec, const ActionScales& scales, const ArrayGeometry& geom,
               double grid_resolution);

  int param_dim() const { return static_cast<int>(offset_.size()); }
  LayerParams decode(const VecR& raw) const;

 private:
  ParamCodec codec_;
  VecR offset_;
  VecR scale_;
  std::vector<bool> log_scale_;
};

enum class TransitionKind { unfolded, blackbox };

/// Everything fixed across an episode: geometry, grid, pilots, solver and
/// environment settings, plus the action decoding. active_cols < grid size
/// marks a zero-padded dictionary (smaller trained-on problem embedded in
/// the outer dimensions).
struct Problem {
  ArrayGeometry geom;
  Grid grid;
  PilotMatrix pilot;
  SblHyper hyper;
  EnvConfig env;
  ParamCodec codec;
  ActionScales scales;
  ActionMapper mapper;
  TransitionKind kind = TransitionKind::unfolded;
  int active_cols = 0;
  Grid inner_grid;  // grid of the active columns; equals grid when not padded

  static Problem standard(const ArrayGeometry& geom, const Grid& grid, const PilotMatrix& pilot,
                          const SblHyper& hyper, const EnvConfig& env, CodecMode mode,
                          const ActionScales& scales, TransitionKind kind = TransitionKind::unfolded);

  bool padded() const { return active_cols < grid.size(); }
  MatC dictionary(const VecR& beta) const;
  MatC dictionary_derivative(const VecR& beta) const;
  int feature_dim() const { return 1 + 2 * grid.size() + 2 * pilot.length; }
  int residual_offset() const { return 1 + 2 * grid.size(); }
  int residual_len() const { return 2 * pilot.length; }
  int param_dim() const;
};

/// MDP state: solver iterate, current reconstruction and residual, and the
/// flattened feature vector [log alpha, log gamma, beta, residual/||y||].
struct EnvState {
  SblState sbl;
  VecC residual;  // y - X h_hat
  VecC h_hat;
  int t = 0;
  VecR features;
};

struct StepResult {
  EnvState next;
  double reward = 0.0;
  bool done = false;
  double err_pre_sq = 0.0;  // ||h - h_hat||^2 before the layer, paired with L_t
  double nmse_after = 0.0;
  double halt_term = 0.0;
};

struct EpisodeStep {
  VecR features;
  VecR action;
  double reward = 0.0;
  double halting = 0.0;
  double nmse_after = 0.0;
  double err_pre_sq = 0.0;
};

struct EpisodeTrace {
  std::vector<EpisodeStep> steps;
  VecR final_features;     // state after the last executed layer
  bool ended_done = false; // terminated via the stopping rule (or the cap)
  int layers_used = 0;
  double nmse0 = 0.0;
  double final_nmse = 0.0;
  double discounted_return = 0.0;
  double undiscounted_return = 0.0;
};

VecR state_features(const Problem& problem, const SblState& sbl, const VecC& residual, double y_norm);

/// SBL initialization plus one support-select/reconstruct pass.
EnvState env_reset(const Problem& problem, const ChannelSample& sample);

/// Applies one unfolded layer with explicit parameters (unfolded problems
/// only), reconstructs, and scores. done when the halting score drops to
/// epsilon or the layer budget is exhausted.
StepResult env_step(const Problem& problem, const EnvState& state, const LayerParams& params,
                    double halting, const ChannelSample& sample);

/// Decodes a raw agent action (params part + halting score last) and steps;
/// dispatches on the problem's transition kind.
StepResult env_step_raw(const Problem& problem, const EnvState& state, const VecR& action,
                        const ChannelSample& sample);

/// Full episode under the agent's policy.
EpisodeTrace rollout(DdpgAgent& agent, const Problem& problem, const ChannelSample& sample, bool explore,
                     RngStream* rng);

/// Episode with done forced only at the given depth (halting ignored).
EpisodeTrace rollout_fixed_depth(DdpgAgent& agent, const Problem& problem, const ChannelSample& sample,
                                 int depth);

/// Episode where every action is the oracle plain-SBL parameterization;
/// halting scores follow the true reconstruction error against sqrt(rho).
EpisodeTrace rollout_plain_policy(const Problem& problem, const ChannelSample& sample, int depth);

/// One black-box transition: a single trainable fully-connected layer acts
/// on [log alpha, log gamma, beta] and the squashed output is applied as a
/// bounded delta. Exposed for tests.
SblState blackbox_transition(const Problem& problem, const SblState& state, const VecR& raw_params);

/// Raw action size of the black-box transition: diag + rank-1 + bias over
/// the (1 + 2*Jhat)-dimensional state core.
int blackbox_param_dim(int jhat);

}  // namespace ogsbl
