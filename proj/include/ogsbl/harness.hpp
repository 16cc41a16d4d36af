#pragma once

#include <iosfwd>

#include "ogsbl/evaluate.hpp"

namespace ogsbl {

struct GeneratedPaths {
  std::string train;
  std::string val;
  std::string test;
};

/// Writes train/val/test datasets with disjoint per-split seeds; the pilot
/// block is shared across splits (it is part of the problem instance).
GeneratedPaths cli_generate(const ExperimentConfig& config, std::ostream& log);

/// Builds one dataset split in memory (split 0/1/2 = train/val/test).
Dataset make_dataset(const ExperimentConfig& config, int split, int n_samples);

/// SBL Off-grid and Standard SBL swept over the config's SNR list.
std::vector<MetricsRow> cli_run_sbl(const ExperimentConfig& config, const std::string& dataset_path,
                                    std::ostream& log);

/// Trains the DDPG-driven unfolding agent; writes the best checkpoint and a
/// training log. Returns 0, or 3 on divergence.
int cli_train(const ExperimentConfig& config, const std::string& train_path, const std::string& val_path,
              const std::string& checkpoint_path, std::ostream& log);

/// Same training loop driving the black-box transition.
int cli_blackbox(const ExperimentConfig& config, const std::string& train_path, const std::string& val_path,
                 const std::string& checkpoint_path, std::ostream& log);

/// sweep is "epsilon", "depth", or "snr".
std::vector<MetricsRow> cli_evaluate(const ExperimentConfig& config, const std::string& checkpoint_path,
                                     const std::string& dataset_path, const std::string& sweep,
                                     std::ostream& log);

/// Evaluates a trained checkpoint on a smaller problem by zero padding the
/// pilot rows and dictionary columns up to the trained dimensions. When a
/// matched dataset (trained dimensions) is supplied its rows are emitted
/// alongside for the gap report.
std::vector<MetricsRow> cli_zero_pad_eval(const ExperimentConfig& config, const std::string& checkpoint_path,
                                          const std::string& small_dataset_path,
                                          const std::string& matched_dataset_path, std::ostream& log);

/// Assembles the zero-padded problem + samples for a trained outer shape.
std::pair<Problem, std::vector<ChannelSample>> zero_pad_problem(const Problem& trained,
                                                                const Dataset& small_dataset);

}  // namespace ogsbl
