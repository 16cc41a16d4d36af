#include "ogsbl/train.hpp"

#include <cmath>
#include <ostream>

#include <json.hpp>

namespace ogsbl {

using nlohmann::json;

Problem problem_from_config(const ExperimentConfig& config, const Dataset& dataset, TransitionKind kind) {
  if (dataset.geometry.n_antennas != config.geometry.n_antennas ||
      dataset.pilot.length != config.pilot_length || dataset.grid.size() != config.grid_size) {
    throw DimensionError("dataset dimensions do not match config");
  }
  return Problem::standard(dataset.geometry, dataset.grid, dataset.pilot, config.sbl, config.env,
                           codec_mode_from_string(config.codec_mode), config.scales, kind);
}

std::pair<double, double> validate_agent(DdpgAgent& agent, const Problem& problem, const Dataset& data,
                                         int max_samples) {
  const int n = std::min<int>(max_samples, static_cast<int>(data.samples.size()));
  if (n == 0) throw DimensionError("validate_agent: empty validation set");
  double nmse_sum = 0.0;
  double layer_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const EpisodeTrace trace = rollout(agent, problem, data.samples[static_cast<std::size_t>(i)], false, nullptr);
    nmse_sum += trace.final_nmse;
    layer_sum += trace.layers_used;
  }
  return {nmse_sum / n, layer_sum / n};
}

namespace {

/// Ring buffer of supervised (residual, error) pairs for the halting net.
class HaltingBuffer {
 public:
  explicit HaltingBuffer(std::size_t capacity) : capacity_(capacity) {}

  void push(HaltingPair pair) {
    if (data_.size() < capacity_) {
      data_.push_back(std::move(pair));
    } else {
      data_[next_] = std::move(pair);
    }
    next_ = (next_ + 1) % capacity_;
  }

  std::size_t size() const { return data_.size(); }

  std::vector<const HaltingPair*> sample(std::size_t batch, RngStream& rng) const {
    std::vector<const HaltingPair*> out(batch);
    for (std::size_t i = 0; i < batch; ++i) out[i] = &data_[rng.integer(data_.size())];
    return out;
  }

 private:
  std::size_t capacity_;
  std::vector<HaltingPair> data_;
  std::size_t next_ = 0;
};

std::string checkpoint_meta(const ExperimentConfig& config, TransitionKind kind, const DdpgAgent& agent,
                            double best_val_nmse, int episodes_trained) {
  json j;
  j["config"] = json::parse(config_to_json(config));
  j["kind"] = kind == TransitionKind::unfolded ? "unfolded" : "blackbox";
  j["state_dim"] = agent.state_dim;
  j["param_dim"] = agent.param_dim;
  j["residual_offset"] = agent.residual_offset;
  j["residual_len"] = agent.residual_len;
  j["best_val_nmse"] = best_val_nmse;
  j["episodes_trained"] = episodes_trained;
  return j.dump();
}

}  // namespace

TrainOutcome train_agent(const ExperimentConfig& config, TransitionKind kind, const Dataset& train_set,
                         const Dataset& val_set, std::ostream* log) {
  TrainOutcome outcome;
  Problem problem = problem_from_config(config, train_set, kind);

  RngStream net_rng(RngStream(config.seed).fork(101).engine()());
  RngStream episode_rng(RngStream(config.seed).fork(202).engine()());
  RngStream update_rng(RngStream(config.seed).fork(303).engine()());

  DdpgAgent agent = DdpgAgent::create(problem.feature_dim(), problem.param_dim(), problem.residual_offset(),
                                      problem.residual_len(), config.ddpg,
                                      config.halting_mode == "tau" ? HaltingMode::tau : HaltingMode::score,
                                      net_rng);
  HaltingBuffer halting_pairs(8192);

  double best_val = std::numeric_limits<double>::infinity();
  double best_layers = 0.0;
  const int episodes = config.episodes;
  const bool decay = config.lr_schedule == "decay";

  for (int ep = 0; ep < episodes; ++ep) {
    const double frac = episodes > 1 ? static_cast<double>(ep) / (episodes - 1) : 1.0;
    agent.noise_sigma = config.ddpg.noise_sigma_start +
                        frac * (config.ddpg.noise_sigma_end - config.ddpg.noise_sigma_start);
    if (decay) {
      const double lr = config.lr_decay_start * std::pow(config.lr_decay_end / config.lr_decay_start, frac);
      agent.config.actor_lr = lr;
      agent.config.critic_lr = lr;
    }

    const auto idx = episode_rng.integer(train_set.samples.size());
    const ChannelSample& sample = train_set.samples[idx];
    const EpisodeTrace trace = rollout(agent, problem, sample, true, &episode_rng);
    outcome.episode_returns.push_back(trace.undiscounted_return);

    for (std::size_t k = 0; k < trace.steps.size(); ++k) {
      const EpisodeStep& step = trace.steps[k];
      Transition tr;
      tr.s = step.features;
      tr.a = step.action;
      tr.r = step.reward;
      tr.s_next = k + 1 < trace.steps.size() ? trace.steps[k + 1].features : trace.final_features;
      tr.done = k + 1 == trace.steps.size() && trace.ended_done;
      agent.buffer.push(std::move(tr));
      halting_pairs.push({step.features.segment(agent.residual_offset, agent.residual_len), step.err_pre_sq});
    }

    TrainLogRow row;
    row.episode = ep;
    row.episode_return = trace.undiscounted_return;
    const std::size_t batch = static_cast<std::size_t>(config.ddpg.batch_size);
    if (agent.buffer.size() >= batch) {
      const int updates = std::max<int>(1, static_cast<int>(trace.steps.size()) / config.ddpg.update_period);
      for (int u = 0; u < updates; ++u) {
        const auto transitions = agent.buffer.sample(batch, update_rng);
        row.critic_loss = critic_update(agent, transitions);
        row.actor_objective = actor_update(agent, transitions);
        soft_update_targets(agent);
        if (agent.halting_mode == HaltingMode::score && halting_pairs.size() >= batch) {
          const auto pairs = halting_pairs.sample(batch, update_rng);
          row.halting_cost = halting_supervised_update(agent, pairs, config.env.rho);
        }
      }
      if (!std::isfinite(row.critic_loss) || !std::isfinite(row.actor_objective) ||
          !std::isfinite(row.halting_cost)) {
        outcome.diverged = true;
        outcome.diagnostic = "non-finite loss at episode " + std::to_string(ep);
        if (log) *log << "DIVERGED: " << outcome.diagnostic << "\n";
        return outcome;
      }
    }

    const bool validate_now = (ep + 1) % config.val_period == 0 || ep + 1 == episodes;
    if (validate_now) {
      const auto [val_nmse, val_layers] = validate_agent(agent, problem, val_set, config.val_episodes);
      row.val_nmse = val_nmse;
      row.val_layers = val_layers;
      if (!std::isfinite(val_nmse)) {
        outcome.diverged = true;
        outcome.diagnostic = "non-finite validation NMSE at episode " + std::to_string(ep);
        if (log) *log << "DIVERGED: " << outcome.diagnostic << "\n";
        return outcome;
      }
      if (val_nmse < best_val) {
        best_val = val_nmse;
        best_layers = val_layers;
        outcome.best = agent_to_checkpoint(agent, checkpoint_meta(config, kind, agent, best_val, ep + 1));
      }
      if (log) {
        *log << "episode " << ep + 1 << " return " << trace.undiscounted_return << " critic_loss "
             << row.critic_loss << " val_nmse_db " << 10.0 * std::log10(std::max(val_nmse, 1e-300))
             << " val_layers " << val_layers << "\n";
      }
    }
    outcome.log.push_back(row);
  }

  outcome.best_val_nmse = best_val;
  outcome.best_val_layers = best_layers;
  if (outcome.best.nets.empty()) {
    outcome.best = agent_to_checkpoint(agent, checkpoint_meta(config, kind, agent, best_val, episodes));
  }
  return outcome;
}

std::pair<ExperimentConfig, TransitionKind> checkpoint_config(const Checkpoint& ckpt) {
  json meta;
  try {
    meta = json::parse(ckpt.meta_json);
  } catch (const json::parse_error& e) {
    throw IoError(std::string("checkpoint metadata is not valid JSON: ") + e.what());
  }
  const ExperimentConfig config = config_from_json_text(meta.at("config").dump());
  const TransitionKind kind =
      meta.at("kind").get<std::string>() == "blackbox" ? TransitionKind::blackbox : TransitionKind::unfolded;
  return {config, kind};
}

namespace {

std::pair<Problem, DdpgAgent> restore_with_problem(const Checkpoint& ckpt, Problem problem,
                                                   const ExperimentConfig& config) {
  RngStream dummy(0);
  DdpgAgent agent = DdpgAgent::create(problem.feature_dim(), problem.param_dim(), problem.residual_offset(),
                                      problem.residual_len(), config.ddpg,
                                      config.halting_mode == "tau" ? HaltingMode::tau : HaltingMode::score,
                                      dummy);
  agent_from_checkpoint(ckpt, agent);
  return {std::move(problem), std::move(agent)};
}

}  // namespace

std::pair<Problem, DdpgAgent> restore_agent(const Checkpoint& ckpt, const Dataset& dataset) {
  auto [config, kind] = checkpoint_config(ckpt);
  return restore_with_problem(ckpt, problem_from_config(config, dataset, kind), config);
}

std::pair<Problem, DdpgAgent> restore_agent(const Checkpoint& ckpt) {
  auto [config, kind] = checkpoint_config(ckpt);
  // Recreate the training pilot from the config seed (the same derivation
  // dataset generation uses).
  RngStream pilot_rng = RngStream(config.seed).fork(7001);
  Dataset shape;
  shape.geometry = config.geometry;
  shape.grid = Grid::uniform(config.grid_size);
  shape.pilot = generate_pilots(config.pilot_length, config.geometry, config.power, pilot_rng);
  return restore_with_problem(ckpt, problem_from_config(config, shape, kind), config);
}

}  // namespace ogsbl
