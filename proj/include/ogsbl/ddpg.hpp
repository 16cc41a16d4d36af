#pragma once

#include <cstddef>
#include <vector>

#include "ogsbl/mlp.hpp"

namespace ogsbl {

struct DdpgConfig {
  double discount = 0.95;
  double soft_tau = 0.005;
  int batch_size = 64;
  double actor_lr = 1e-3;
  double critic_lr = 1e-3;
  double halting_lr = 1e-2;
  double noise_sigma_start = 0.3;
  double noise_sigma_end = 0.02;
  int update_period = 1;      // env steps between gradient updates
  int hard_copy_period = 0;   // optional hard target copy, 0 disables
  std::size_t buffer_capacity = 50000;
  std::vector<int> actor_hidden{256, 256, 256};
  std::vector<int> critic_hidden{256, 256, 256};
  std::vector<int> halting_hidden{64, 64, 64};
};

struct Transition {
  VecR s;
  VecR a;  // param_dim + 1, halting score last
  double r = 0.0;
  VecR s_next;
  bool done = false;
};

/// Fixed-capacity ring with FIFO eviction and seeded uniform sampling.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {}

  void push(Transition t);
  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& at(std::size_t i) const { return data_[i]; }
  std::vector<const Transition*> sample(std::size_t batch, RngStream& rng) const;

 private:
  std::size_t capacity_;
  std::vector<Transition> data_;
  std::size_t next_ = 0;
};

/// Whether the halting component of the action comes from the dedicated
/// residual network (the default) or from an extra actor output unit
/// thresholded the same way.
enum class HaltingMode { score, tau };

/// Actor-critic pair with target copies, replay buffer, and the
/// halting-score sub-network operating on the residual slice of the state.
struct DdpgAgent {
  Mlp actor;
  Mlp critic;
  Mlp target_actor;
  Mlp target_critic;
  Mlp halting;  // residual features -> sigmoid scalar
  ReplayBuffer buffer{0};
  DdpgConfig config;
  HaltingMode halting_mode = HaltingMode::score;
  int state_dim = 0;
  int param_dim = 0;        // raw action components excluding the halting score
  int residual_offset = 0;  // where the residual slice starts in the state
  int residual_len = 0;
  double noise_sigma = 0.0;
  long updates_done = 0;

  int action_dim() const { return param_dim + 1; }

  static DdpgAgent create(int state_dim, int param_dim, int residual_offset, int residual_len,
                          const DdpgConfig& config, HaltingMode mode, RngStream& rng);
};

/// Policy action: tanh-squashed parameter vector plus the halting score.
/// With explore set, Gaussian noise of the current sigma is added to the
/// parameter part and re-clamped to [-1, 1]; the halting component stays
/// deterministic.
VecR actor_act(DdpgAgent& agent, const VecR& state_features, bool explore, RngStream* rng);

/// Halting score for a state, per the agent's halting mode.
double agent_halting_score(const DdpgAgent& agent, const VecR& state_features);

/// One SGD step on the mean squared TD error with targets from the target
/// networks; returns the pre-step loss.
double critic_update(DdpgAgent& agent, const std::vector<const Transition*>& batch);

/// One ascent step on mean Q(s, mu(s)) through the critic's action input;
/// returns the pre-step policy objective. Gradients flow into the actor and
/// into the halting sub-network.
double actor_update(DdpgAgent& agent, const std::vector<const Transition*>& batch);

/// target <- tau * main + (1 - tau) * target.
void soft_update(const Mlp& main, Mlp& target, double tau);
void soft_update_targets(DdpgAgent& agent);

/// Forward pass of the halting network, clamped into the open interval.
double halting_score(const Mlp& halting_net, const VecR& residual_features);

/// Single-layer closed form sigma(p1 ||Q r||^2 + p2).
double quadratic_halting_score(double p1, double p2, const MatC& q, const VecC& residual);

/// sum_t ||h - h^t||^2 / L_t + rho L_t. Throws on a zero score.
double halting_cost(const std::vector<double>& errors_sq, const std::vector<double>& scores, double rho);

/// r = (nmse_prev - nmse_cur - eta_pen) - lambda_halt * halt_term.
double compute_reward(double nmse_prev, double nmse_cur, double eta_pen, double halt_term, double lambda_halt);

struct HaltingPair {
  VecR residual_features;
  double err_sq = 0.0;  // ||h - h^t||^2 paired with the score at the same t
};

/// One supervised descent step on the halting cost over the batch; the true
/// channel is available in training, so err_sq is exact. Returns the batch
/// mean cost before the step.
double halting_supervised_update(DdpgAgent& agent, const std::vector<const HaltingPair*>& batch, double rho);

}  // namespace ogsbl
