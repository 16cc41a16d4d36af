#include "ogsbl/ddpg.hpp"

#include <algorithm>
#include <cmath>

namespace ogsbl {

namespace {

std::vector<int> net_sizes(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> sizes;
  sizes.push_back(in);
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return sizes;
}

std::vector<Act> net_acts(std::size_t hidden_layers, Act final_act) {
  std::vector<Act> acts(hidden_layers, Act::relu);
  acts.push_back(final_act);
  return acts;
}

VecR state_action(const VecR& s, const VecR& a) {
  VecR sa(s.size() + a.size());
  sa << s, a;
  return sa;
}

}  // namespace

void ReplayBuffer::push(Transition t) {
  if (capacity_ == 0) throw DimensionError("replay buffer has zero capacity");
  if (data_.size() < capacity_) {
    data_.push_back(std::move(t));
  } else {
    data_[next_] = std::move(t);
  }
  next_ = (next_ + 1) % capacity_;
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t batch, RngStream& rng) const {
  if (data_.empty()) throw DimensionError("cannot sample from an empty replay buffer");
  std::vector<const Transition*> out(batch);
  for (std::size_t i = 0; i < batch; ++i) {
    out[i] = &data_[rng.integer(data_.size())];
  }
  return out;
}

DdpgAgent DdpgAgent::create(int state_dim, int param_dim, int residual_offset, int residual_len,
                            const DdpgConfig& config, HaltingMode mode, RngStream& rng) {
  DdpgAgent agent;
  agent.config = config;
  agent.halting_mode = mode;
  agent.state_dim = state_dim;
  agent.param_dim = param_dim;
  agent.residual_offset = residual_offset;
  agent.residual_len = residual_len;
  agent.noise_sigma = config.noise_sigma_start;
  agent.buffer = ReplayBuffer(config.buffer_capacity);

  const int actor_out = mode == HaltingMode::tau ? param_dim + 1 : param_dim;
  agent.actor = Mlp::create(net_sizes(state_dim, config.actor_hidden, actor_out),
                            net_acts(config.actor_hidden.size(), Act::tanh), rng);
  agent.critic = Mlp::create(net_sizes(state_dim + param_dim + 1, config.critic_hidden, 1),
                             net_acts(config.critic_hidden.size(), Act::identity), rng);
  agent.halting = Mlp::create(net_sizes(residual_len, config.halting_hidden, 1),
                              net_acts(config.halting_hidden.size(), Act::sigmoid), rng);
  agent.target_actor = agent.actor;
  agent.target_critic = agent.critic;
  return agent;
}

double halting_score(const Mlp& halting_net, const VecR& residual_features) {
  const double v = mlp_forward(halting_net, residual_features)(0);
  return std::clamp(v, 1e-12, 1.0 - 1e-12);
}

double agent_halting_score(const DdpgAgent& agent, const VecR& state_features) {
  if (agent.halting_mode == HaltingMode::tau) {
    const VecR out = mlp_forward(agent.actor, state_features);
    return std::clamp(0.5 * (out(agent.param_dim) + 1.0), 1e-12, 1.0 - 1e-12);
  }
  return halting_score(agent.halting, state_features.segment(agent.residual_offset, agent.residual_len));
}

VecR actor_act(DdpgAgent& agent, const VecR& state_features, bool explore, RngStream* rng) {
  const VecR out = mlp_forward(agent.actor, state_features);
  VecR action(agent.param_dim + 1);
  action.head(agent.param_dim) = out.head(agent.param_dim);
  if (explore && agent.noise_sigma > 0.0) {
    if (!rng) throw DimensionError("actor_act: exploration requires an rng");
    for (int i = 0; i < agent.param_dim; ++i) {
      action(i) = std::clamp(action(i) + agent.noise_sigma * rng->gaussian(), -1.0, 1.0);
    }
  }
  if (agent.halting_mode == HaltingMode::tau) {
    action(agent.param_dim) = std::clamp(0.5 * (out(agent.param_dim) + 1.0), 1e-12, 1.0 - 1e-12);
  } else {
    action(agent.param_dim) =
        halting_score(agent.halting, state_features.segment(agent.residual_offset, agent.residual_len));
  }
  return action;
}

namespace {

// Next-state action from the target actor (halting from the shared
// sub-network; it has no target copy).
VecR target_action(const DdpgAgent& agent, const VecR& s_next) {
  const VecR out = mlp_forward(agent.target_actor, s_next);
  VecR a(agent.param_dim + 1);
  a.head(agent.param_dim) = out.head(agent.param_dim);
  if (agent.halting_mode == HaltingMode::tau) {
    a(agent.param_dim) = std::clamp(0.5 * (out(agent.param_dim) + 1.0), 1e-12, 1.0 - 1e-12);
  } else {
    a(agent.param_dim) =
        halting_score(agent.halting, s_next.segment(agent.residual_offset, agent.residual_len));
  }
  return a;
}

}  // namespace

double critic_update(DdpgAgent& agent, const std::vector<const Transition*>& batch) {
  if (batch.empty()) throw DimensionError("critic_update: empty batch");
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  MlpGrads grads = MlpGrads::zeros_like(agent.critic);
  double loss = 0.0;
  for (const Transition* tr : batch) {
    double target = tr->r;
    if (!tr->done) {
      const VecR a_next = target_action(agent, tr->s_next);
      target += agent.config.discount * mlp_forward(agent.target_critic, state_action(tr->s_next, a_next))(0);
    }
    MlpCache cache;
    const double q = mlp_forward(agent.critic, state_action(tr->s, tr->a), &cache)(0);
    const double err = q - target;
    loss += err * err * inv_b;
    VecR dy(1);
    dy(0) = 2.0 * err * inv_b;
    mlp_backward(agent.critic, cache, dy, grads);
  }
  sgd_step(agent.critic, grads, agent.config.critic_lr);
  return loss;
}

double actor_update(DdpgAgent& agent, const std::vector<const Transition*>& batch) {
  if (batch.empty()) throw DimensionError("actor_update: empty batch");
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  MlpGrads actor_grads = MlpGrads::zeros_like(agent.actor);
  MlpGrads halting_grads = MlpGrads::zeros_like(agent.halting);
  bool halting_touched = false;
  double objective = 0.0;

  for (const Transition* tr : batch) {
    MlpCache actor_cache;
    const VecR out = mlp_forward(agent.actor, tr->s, &actor_cache);
    VecR a(agent.param_dim + 1);
    a.head(agent.param_dim) = out.head(agent.param_dim);

    MlpCache halting_cache;
    double halt_pre = 0.0;  // unclamped sigmoid output for exact chain rule
    if (agent.halting_mode == HaltingMode::tau) {
      a(agent.param_dim) = 0.5 * (out(agent.param_dim) + 1.0);
    } else {
      const VecR residual = tr->s.segment(agent.residual_offset, agent.residual_len);
      halt_pre = mlp_forward(agent.halting, residual, &halting_cache)(0);
      a(agent.param_dim) = halt_pre;
    }

    MlpCache critic_cache;
    const double q = mlp_forward(agent.critic, state_action(tr->s, a), &critic_cache)(0);
    objective += q * inv_b;

    // dQ/d(critic input), action slice only.
    MlpGrads critic_scratch = MlpGrads::zeros_like(agent.critic);
    VecR dq(1);
    dq(0) = 1.0;
    const VecR dinput = mlp_backward(agent.critic, critic_cache, dq, critic_scratch);
    const VecR da = dinput.tail(agent.param_dim + 1);

    // Ascent on Q: accumulate the negated gradient so sgd_step ascends.
    VecR upstream(out.size());
    upstream.head(agent.param_dim) = -inv_b * da.head(agent.param_dim);
    if (agent.halting_mode == HaltingMode::tau) {
      upstream(agent.param_dim) = -inv_b * 0.5 * da(agent.param_dim);
    }
    mlp_backward(agent.actor, actor_cache, upstream, actor_grads);

    if (agent.halting_mode == HaltingMode::score) {
      VecR dh(1);
      dh(0) = -inv_b * da(agent.param_dim);
      mlp_backward(agent.halting, halting_cache, dh, halting_grads);
      halting_touched = true;
    }
    (void)halt_pre;
  }

  sgd_step(agent.actor, actor_grads, agent.config.actor_lr);
  if (halting_touched) sgd_step(agent.halting, halting_grads, agent.config.actor_lr);
  return objective;
}

void soft_update(const Mlp& main, Mlp& target, double tau) {
  if (main.weights.size() != target.weights.size()) {
    throw DimensionError("soft_update: mismatched networks");
  }
  for (std::size_t l = 0; l < main.weights.size(); ++l) {
    target.weights[l] = tau * main.weights[l] + (1.0 - tau) * target.weights[l];
    target.biases[l] = tau * main.biases[l] + (1.0 - tau) * target.biases[l];
  }
}

void soft_update_targets(DdpgAgent& agent) {
  soft_update(agent.actor, agent.target_actor, agent.config.soft_tau);
  soft_update(agent.critic, agent.target_critic, agent.config.soft_tau);
  ++agent.updates_done;
  if (agent.config.hard_copy_period > 0 && agent.updates_done % agent.config.hard_copy_period == 0) {
    agent.target_actor = agent.actor;
    agent.target_critic = agent.critic;
  }
}

double quadratic_halting_score(double p1, double p2, const MatC& q, const VecC& residual) {
  const double z = p1 * (q * residual).squaredNorm() + p2;
  const double v = 1.0 / (1.0 + std::exp(-z));
  return std::clamp(v, 1e-12, 1.0 - 1e-12);
}

double halting_cost(const std::vector<double>& errors_sq, const std::vector<double>& scores, double rho) {
  if (errors_sq.size() != scores.size()) throw DimensionError("halting_cost: list length mismatch");
  double cost = 0.0;
  for (std::size_t t = 0; t < scores.size(); ++t) {
    if (scores[t] <= 0.0) throw NumericalError("halting_cost: zero halting score");
    cost += errors_sq[t] / scores[t] + rho * scores[t];
  }
  return cost;
}

double compute_reward(double nmse_prev, double nmse_cur, double eta_pen, double halt_term, double lambda_halt) {
  return (nmse_prev - nmse_cur - eta_pen) - lambda_halt * halt_term;
}

double halting_supervised_update(DdpgAgent& agent, const std::vector<const HaltingPair*>& batch, double rho) {
  if (batch.empty()) throw DimensionError("halting_supervised_update: empty batch");
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  MlpGrads grads = MlpGrads::zeros_like(agent.halting);
  double cost = 0.0;
  for (const HaltingPair* pair : batch) {
    MlpCache cache;
    const double raw = mlp_forward(agent.halting, pair->residual_features, &cache)(0);
    const double l = std::clamp(raw, 1e-12, 1.0 - 1e-12);
    cost += (pair->err_sq / l + rho * l) * inv_b;
    VecR dy(1);
    dy(0) = inv_b * (rho - pair->err_sq / (l * l));  // d(e/L + rho L)/dL
    mlp_backward(agent.halting, cache, dy, grads);
  }
  sgd_step(agent.halting, grads, agent.config.halting_lr);
  return cost;
}

}  // namespace ogsbl
