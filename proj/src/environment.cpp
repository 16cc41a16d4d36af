#include "ogsbl/environment.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace ogsbl {

namespace {
constexpr double kStateFloor = 1e-12;
constexpr double kStateCap = 1e12;
}  // namespace

ActionMapper::ActionMapper(const ParamCodec& codec, const ActionScales& scales, const ArrayGeometry& geom,
                           double grid_resolution)
    : codec_(codec) {
  const int len = codec.flat_len();
  offset_ = VecR::Zero(len);
  scale_ = VecR::Zero(len);
  log_scale_.assign(static_cast<std::size_t>(len), false);
  int pos = 0;

  auto box = [&](double off, double sc) {
    offset_(pos) = off;
    scale_(pos) = sc;
    ++pos;
  };
  auto log_box = [&](double top) {  // top * 10^{3(u-1)}, sign carried by top
    log_scale_[static_cast<std::size_t>(pos)] = true;
    offset_(pos) = 0.0;
    scale_(pos) = top;
    ++pos;
  };
  auto complex_box = [&](double sc) {
    box(0.0, sc);  // re
    box(0.0, sc);  // im
  };
  // Square block in codec order; im_diag_offset centers the block's
  // diagonal on a purely imaginary target (the steering-derivative operator).
  auto square_block = [&](int dim, double sc, auto im_diag_offset) {
    switch (codec_.mode) {
      case CodecMode::scalar:
        complex_box(sc);
        break;
      case CodecMode::diagonal:
        for (int k = 0; k < dim; ++k) {
          box(0.0, sc);
          box(im_diag_offset(k), sc);
        }
        break;
      case CodecMode::diagonal_rank1:
        for (int k = 0; k < dim; ++k) {
          box(0.0, sc);
          box(im_diag_offset(k), sc);
        }
        for (int k = 0; k < 2 * dim; ++k) complex_box(sc);
        break;
      case CodecMode::full:
        for (int c = 0; c < dim; ++c) {
          for (int r = 0; r < dim; ++r) {
            box(0.0, sc);
            box(r == c ? im_diag_offset(r) : 0.0, sc);
          }
        }
        break;
    }
  };
  auto zero_target = [](int) { return 0.0; };
  auto w1_target = [&](int k) { return -2.0 * std::numbers::pi * geom.spacing_ratio * k; };

  log_box(scales.ab_max);  // a
  log_box(scales.ab_max);  // b
  for (int j = 0; j < codec.jhat; ++j) log_box(-scales.c1_scale);  // c1, negative branch
  for (int j = 0; j < codec.jhat; ++j) log_box(grid_resolution);   // step_beta

  square_block(codec.n, scales.w1_scale, w1_target);
  for (int k = 0; k < codec.n; ++k) complex_box(scales.b1_scale);
  square_block(codec.t, scales.w2_scale, zero_target);
  for (int k = 0; k < codec.jhat; ++k) complex_box(scales.b2_scale);
  for (int k = 0; k < codec.t; ++k) complex_box(scales.b3_scale);
  square_block(codec.jhat, scales.o1_scale, zero_target);
  for (int k = 0; k < codec.jhat; ++k) complex_box(scales.o2_scale);

  if (pos != len) throw DimensionError("ActionMapper: layout walk does not match codec length");
}

LayerParams ActionMapper::decode(const VecR& raw) const {
  if (raw.size() != offset_.size()) {
    throw DimensionError("ActionMapper: raw action has wrong length");
  }
  VecR flat(raw.size());
  for (Eigen::Index i = 0; i < raw.size(); ++i) {
    flat(i) = log_scale_[static_cast<std::size_t>(i)]
                  ? scale_(i) * std::pow(10.0, 3.0 * (raw(i) - 1.0))
                  : offset_(i) + scale_(i) * raw(i);
  }
  return decode_params(flat, codec_);
}

Problem Problem::standard(const ArrayGeometry& geom, const Grid& grid, const PilotMatrix& pilot,
                          const SblHyper& hyper, const EnvConfig& env, CodecMode mode,
                          const ActionScales& scales, TransitionKind kind) {
  Problem p;
  p.geom = geom;
  p.grid = grid;
  p.pilot = pilot;
  p.hyper = hyper;
  p.env = env;
  p.codec = ParamCodec{mode, geom.n_antennas, pilot.length, grid.size()};
  p.scales = scales;
  p.mapper = ActionMapper(p.codec, scales, geom, grid.resolution);
  p.kind = kind;
  p.active_cols = grid.size();
  p.inner_grid = grid;
  return p;
}

MatC Problem::dictionary(const VecR& beta) const {
  if (!padded()) return build_dictionary(geom, grid, beta);
  MatC dict = MatC::Zero(geom.n_antennas, grid.size());
  dict.leftCols(active_cols) = build_dictionary(geom, inner_grid, beta.head(active_cols));
  return dict;
}

MatC Problem::dictionary_derivative(const VecR& beta) const {
  if (!padded()) return build_dictionary_derivative(geom, grid, beta);
  MatC deriv = MatC::Zero(geom.n_antennas, grid.size());
  deriv.leftCols(active_cols) = build_dictionary_derivative(geom, inner_grid, beta.head(active_cols));
  return deriv;
}

int Problem::param_dim() const {
  return kind == TransitionKind::unfolded ? codec.flat_len() : blackbox_param_dim(grid.size());
}

VecR state_features(const Problem& problem, const SblState& sbl, const VecC& residual, double y_norm) {
  const int jhat = problem.grid.size();
  const int t_len = problem.pilot.length;
  const double clip = problem.env.log_clip;
  VecR f(problem.feature_dim());
  f(0) = std::clamp(std::log(sbl.alpha), -clip, clip);
  for (int j = 0; j < jhat; ++j) f(1 + j) = std::clamp(std::log(sbl.gamma(j)), -clip, clip);
  f.segment(1 + jhat, jhat) = sbl.beta;
  const double inv = 1.0 / std::max(y_norm, 1e-12);
  for (int i = 0; i < t_len; ++i) {
    f(1 + 2 * jhat + i) = residual(i).real() * inv;
    f(1 + 2 * jhat + t_len + i) = residual(i).imag() * inv;
  }
  return f;
}

EnvState env_reset(const Problem& problem, const ChannelSample& sample) {
  const VecC& y = sample.y;
  if (y.size() != problem.pilot.length) throw DimensionError("env_reset: observation length mismatch");
  EnvState state;
  state.sbl = initial_state(y, problem.grid.size());
  const MatC dict = problem.dictionary(state.sbl.beta);
  const MatC phi = problem.pilot.x * dict;
  const auto support = select_support(state.sbl.gamma, problem.hyper.support_ratio, problem.hyper.gamma_cap);
  state.h_hat = reconstruct_channel(dict, phi, support, y);
  state.residual = y - problem.pilot.x * state.h_hat;
  state.t = 0;
  state.features = state_features(problem, state.sbl, state.residual, y.norm());
  return state;
}

namespace {

StepResult finish_step(const Problem& problem, const EnvState& state, const SblState& sbl_next,
                       double halting, const ChannelSample& sample) {
  const VecC& y = sample.y;
  const MatC dict = problem.dictionary(sbl_next.beta);
  const MatC phi = problem.pilot.x * dict;
  const auto support = select_support(sbl_next.gamma, problem.hyper.support_ratio, problem.hyper.gamma_cap);

  StepResult result;
  result.next.sbl = sbl_next;
  result.next.h_hat = reconstruct_channel(dict, phi, support, y);
  result.next.residual = y - problem.pilot.x * result.next.h_hat;
  result.next.t = state.t + 1;
  result.next.features = state_features(problem, sbl_next, result.next.residual, y.norm());

  const double nmse_prev = nmse(state.h_hat, sample.h);
  result.nmse_after = nmse(result.next.h_hat, sample.h);
  result.err_pre_sq = (state.h_hat - sample.h).squaredNorm();
  result.halt_term = result.err_pre_sq / halting + problem.env.rho * halting;
  result.reward = compute_reward(nmse_prev, result.nmse_after, problem.env.eta_pen, result.halt_term,
                                 problem.env.lambda_halt);
  result.done = halting <= problem.env.epsilon || result.next.t >= problem.env.max_layers;
  return result;
}

}  // namespace

StepResult env_step(const Problem& problem, const EnvState& state, const LayerParams& params,
                    double halting, const ChannelSample& sample) {
  if (problem.kind != TransitionKind::unfolded) {
    throw DimensionError("env_step with LayerParams requires an unfolded problem");
  }
  if (halting <= 0.0 || halting >= 1.0) throw NumericalError("env_step: halting score outside (0,1)");
  const MatC dict = problem.dictionary(state.sbl.beta);
  const double resolution = problem.inner_grid.resolution;
  const SblState sbl_next = unfolded_layer(state.sbl, params, dict, problem.pilot.x, sample.y, resolution);
  return finish_step(problem, state, sbl_next, halting, sample);
}

StepResult env_step_raw(const Problem& problem, const EnvState& state, const VecR& action,
                        const ChannelSample& sample) {
  if (action.size() != problem.param_dim() + 1) {
    throw DimensionError("env_step_raw: action length does not match problem");
  }
  const double halting = std::clamp(action(action.size() - 1), 1e-12, 1.0 - 1e-12);
  const VecR raw = action.head(action.size() - 1);
  if (problem.kind == TransitionKind::unfolded) {
    return env_step(problem, state, problem.mapper.decode(raw), halting, sample);
  }
  const SblState sbl_next = blackbox_transition(problem, state.sbl, raw);
  return finish_step(problem, state, sbl_next, halting, sample);
}

namespace {

EpisodeTrace run_episode(const Problem& problem, const ChannelSample& sample,
                         const std::function<VecR(const EnvState&)>& policy, int forced_depth) {
  EpisodeTrace trace;
  EnvState state = env_reset(problem, sample);
  trace.nmse0 = nmse(state.h_hat, sample.h);
  double discount_pow = 1.0;
  const int budget = forced_depth > 0 ? std::min(forced_depth, problem.env.max_layers)
                                      : problem.env.max_layers;
  for (int t = 0; t < budget; ++t) {
    const VecR action = policy(state);
    StepResult res = env_step_raw(problem, state, action, sample);
    trace.steps.push_back({state.features, action, res.reward, action(action.size() - 1),
                           res.nmse_after, res.err_pre_sq});
    trace.discounted_return += discount_pow * res.reward;
    trace.undiscounted_return += res.reward;
    discount_pow *= problem.env.discount;
    state = std::move(res.next);
    if (forced_depth > 0) {
      if (state.t >= forced_depth) break;
    } else if (res.done) {
      trace.ended_done = true;
      break;
    }
  }
  trace.layers_used = state.t;
  trace.final_nmse = nmse(state.h_hat, sample.h);
  trace.final_features = state.features;
  return trace;
}

}  // namespace

EpisodeTrace rollout(DdpgAgent& agent, const Problem& problem, const ChannelSample& sample, bool explore,
                     RngStream* rng) {
  return run_episode(problem, sample,
                     [&](const EnvState& s) { return actor_act(agent, s.features, explore, rng); }, 0);
}

EpisodeTrace rollout_fixed_depth(DdpgAgent& agent, const Problem& problem, const ChannelSample& sample,
                                 int depth) {
  if (depth < 1) throw DimensionError("rollout_fixed_depth: depth must be at least 1");
  return run_episode(problem, sample,
                     [&](const EnvState& s) { return actor_act(agent, s.features, false, nullptr); }, depth);
}

EpisodeTrace rollout_plain_policy(const Problem& problem, const ChannelSample& sample, int depth) {
  if (problem.kind != TransitionKind::unfolded) {
    throw DimensionError("rollout_plain_policy requires an unfolded problem");
  }
  EpisodeTrace trace;
  EnvState state = env_reset(problem, sample);
  trace.nmse0 = nmse(state.h_hat, sample.h);
  double discount_pow = 1.0;
  const int budget = depth > 0 ? std::min(depth, problem.env.max_layers) : problem.env.max_layers;
  for (int t = 0; t < budget; ++t) {
    const LayerParams params = plain_equivalent_params(state.sbl, problem.pilot, problem.grid, problem.geom,
                                                       sample.y, problem.hyper);
    // The oracle policy grades itself with the true error, the value a
    // perfectly trained halting net would emit.
    const double err = (state.h_hat - sample.h).norm();
    const double halting = std::clamp(err / std::sqrt(problem.env.rho), 1e-9, 1.0 - 1e-9);
    StepResult res = env_step(problem, state, params, halting, sample);
    VecR action = VecR::Zero(1);
    trace.steps.push_back({state.features, action, res.reward, halting, res.nmse_after, res.err_pre_sq});
    trace.discounted_return += discount_pow * res.reward;
    trace.undiscounted_return += res.reward;
    discount_pow *= problem.env.discount;
    state = std::move(res.next);
    if (depth > 0) {
      if (state.t >= depth) break;
    } else if (res.done) {
      trace.ended_done = true;
      break;
    }
  }
  trace.layers_used = state.t;
  trace.final_nmse = nmse(state.h_hat, sample.h);
  trace.final_features = state.features;
  return trace;
}

int blackbox_param_dim(int jhat) {
  return 4 * (1 + 2 * jhat);  // diag, u, v, bias over the state core
}

SblState blackbox_transition(const Problem& problem, const SblState& state, const VecR& raw_params) {
  const int jhat = problem.grid.size();
  const int dim = 1 + 2 * jhat;
  if (raw_params.size() != blackbox_param_dim(jhat)) {
    throw DimensionError("blackbox_transition: action length mismatch");
  }
  const double clip = problem.env.log_clip;
  VecR z(dim);
  z(0) = std::clamp(std::log(state.alpha), -clip, clip);
  for (int j = 0; j < jhat; ++j) z(1 + j) = std::clamp(std::log(state.gamma(j)), -clip, clip);
  z.segment(1 + jhat, jhat) = state.beta;

  const VecR d = raw_params.segment(0, dim);
  const VecR u = raw_params.segment(dim, dim);
  const VecR v = raw_params.segment(2 * dim, dim);
  const VecR bias = raw_params.segment(3 * dim, dim);

  // One fully-connected layer y = tanh(W z + b), W = diag(d) + u v^T / dim.
  VecR pre = d.cwiseProduct(z) + u * (v.dot(z) / static_cast<double>(dim)) + bias;
  const double half = problem.inner_grid.resolution / 2.0;

  SblState next;
  next.iter = state.iter + 1;
  next.gamma.resize(jhat);
  next.beta.resize(jhat);
  const double dla = std::tanh(pre(0));
  next.alpha = std::clamp(std::exp(z(0) + dla), kStateFloor, kStateCap);
  for (int j = 0; j < jhat; ++j) {
    next.gamma(j) = std::clamp(std::exp(z(1 + j) + std::tanh(pre(1 + j))), kStateFloor, kStateCap);
    next.beta(j) = std::clamp(state.beta(j) + half * std::tanh(pre(1 + jhat + j)), -half, half);
  }
  if (problem.padded()) {
    for (int j = problem.active_cols; j < jhat; ++j) next.beta(j) = 0.0;
  }
  return next;
}

}  // namespace ogsbl
