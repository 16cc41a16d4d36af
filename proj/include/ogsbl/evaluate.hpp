#pragma once

#include "ogsbl/metrics.hpp"
#include "ogsbl/train.hpp"

namespace ogsbl {

/// Per-sample results of one evaluation pass.
struct EvalDetail {
  std::vector<double> nmse;    // per sample
  std::vector<int> layers;     // per sample
  double nmse_mean = 0.0;
  double mean_layers = 0.0;
  std::vector<long> histogram;  // depths 1..max observed
};

EvalDetail summarize(const std::vector<double>& nmse, const std::vector<int>& layers);

/// Greedy adaptive rollouts at the given halting constant.
EvalDetail evaluate_adaptive(DdpgAgent& agent, Problem problem, const std::vector<ChannelSample>& samples,
                             double epsilon);

/// Same inputs with done forced only at the given depth (paired design).
EvalDetail evaluate_fixed_depth(DdpgAgent& agent, const Problem& problem,
                                const std::vector<ChannelSample>& samples, int depth);

/// Iterative baselines run to convergence; layers = iterations used.
EvalDetail evaluate_sbl(const std::vector<ChannelSample>& samples, const PilotMatrix& pilot, const Grid& grid,
                        const ArrayGeometry& geom, const SblHyper& hyper, bool offgrid);

/// Re-observes each sample's channel at the given SNR with a per-sample
/// stream forked from (seed, salt); keeps comparisons paired across schemes.
std::vector<ChannelSample> reobserve_at_snr(const std::vector<ChannelSample>& samples, const PilotMatrix& pilot,
                                            double power, double snr_db, std::uint64_t seed,
                                            std::uint64_t salt);

double snr_to_noise_var(double power, double snr_db);

}  // namespace ogsbl
