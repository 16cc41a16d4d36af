#pragma once

#include <iosfwd>
#include <optional>

#include "ogsbl/checkpoint.hpp"
#include "ogsbl/config.hpp"
#include "ogsbl/dataset_io.hpp"

namespace ogsbl {

struct TrainLogRow {
  int episode = 0;
  double critic_loss = 0.0;
  double actor_objective = 0.0;
  double halting_cost = 0.0;
  double episode_return = 0.0;
  double val_nmse = -1.0;  // negative when no validation ran this episode
  double val_layers = -1.0;
};

struct TrainOutcome {
  Checkpoint best;
  double best_val_nmse = 0.0;
  double best_val_layers = 0.0;
  std::vector<TrainLogRow> log;
  std::vector<double> episode_returns;
  bool diverged = false;
  std::string diagnostic;
};

/// Builds the MDP problem a dataset defines: its geometry, grid, and pilot
/// plus the config's solver/env settings.
Problem problem_from_config(const ExperimentConfig& config, const Dataset& dataset, TransitionKind kind);

/// Full DDPG training loop: exploration rollouts, replay updates, the
/// supervised halting regression, periodic greedy validation, and
/// best-checkpoint retention. Detects divergence (non-finite losses) and
/// reports it instead of throwing.
TrainOutcome train_agent(const ExperimentConfig& config, TransitionKind kind, const Dataset& train_set,
                         const Dataset& val_set, std::ostream* log);

/// Rebuilds the problem and agent a checkpoint was trained with; the
/// dataset must carry matching dimensions and pilot.
std::pair<Problem, DdpgAgent> restore_agent(const Checkpoint& ckpt, const Dataset& dataset);

/// Config and transition kind embedded in a checkpoint's metadata.
std::pair<ExperimentConfig, TransitionKind> checkpoint_config(const Checkpoint& ckpt);

/// Restores problem + agent from the checkpoint alone, regenerating the
/// training pilot from the embedded config's seed.
std::pair<Problem, DdpgAgent> restore_agent(const Checkpoint& ckpt);

/// Greedy validation pass: mean NMSE and mean executed layers.
std::pair<double, double> validate_agent(DdpgAgent& agent, const Problem& problem, const Dataset& data,
                                         int max_samples);

}  // namespace ogsbl
