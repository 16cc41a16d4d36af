#include "ogsbl/evaluate.hpp"

#include <algorithm>
#include <cmath>

namespace ogsbl {

EvalDetail summarize(const std::vector<double>& nmse, const std::vector<int>& layers) {
  EvalDetail d;
  d.nmse = nmse;
  d.layers = layers;
  if (nmse.empty()) throw DimensionError("summarize: empty evaluation");
  int max_depth = 1;
  for (int l : layers) max_depth = std::max(max_depth, l);
  d.histogram.assign(static_cast<std::size_t>(max_depth), 0);
  double nmse_sum = 0.0;
  double layer_sum = 0.0;
  for (std::size_t i = 0; i < nmse.size(); ++i) {
    nmse_sum += nmse[i];
    layer_sum += layers[i];
    d.histogram[static_cast<std::size_t>(std::max(1, layers[i]) - 1)] += 1;
  }
  d.nmse_mean = nmse_sum / static_cast<double>(nmse.size());
  d.mean_layers = layer_sum / static_cast<double>(layers.size());
  return d;
}

EvalDetail evaluate_adaptive(DdpgAgent& agent, Problem problem, const std::vector<ChannelSample>& samples,
                             double epsilon) {
  problem.env.epsilon = epsilon;
  std::vector<double> nmse_list;
  std::vector<int> layers;
  nmse_list.reserve(samples.size());
  layers.reserve(samples.size());
  for (const ChannelSample& s : samples) {
    const EpisodeTrace trace = rollout(agent, problem, s, false, nullptr);
    nmse_list.push_back(trace.final_nmse);
    layers.push_back(trace.layers_used);
  }
  return summarize(nmse_list, layers);
}

EvalDetail evaluate_fixed_depth(DdpgAgent& agent, const Problem& problem,
                                const std::vector<ChannelSample>& samples, int depth) {
  std::vector<double> nmse_list;
  std::vector<int> layers;
  nmse_list.reserve(samples.size());
  layers.reserve(samples.size());
  for (const ChannelSample& s : samples) {
    const EpisodeTrace trace = rollout_fixed_depth(agent, problem, s, depth);
    nmse_list.push_back(trace.final_nmse);
    layers.push_back(trace.layers_used);
  }
  return summarize(nmse_list, layers);
}

EvalDetail evaluate_sbl(const std::vector<ChannelSample>& samples, const PilotMatrix& pilot, const Grid& grid,
                        const ArrayGeometry& geom, const SblHyper& hyper, bool offgrid) {
  std::vector<double> nmse_list;
  std::vector<int> layers;
  nmse_list.reserve(samples.size());
  layers.reserve(samples.size());
  for (const ChannelSample& s : samples) {
    const SblResult result = offgrid ? run_sbl(s, pilot, grid, geom, hyper)
                                     : run_standard_sbl(s, pilot, grid, geom, hyper);
    nmse_list.push_back(result.nmse);
    layers.push_back(result.iters_used);
  }
  return summarize(nmse_list, layers);
}

double snr_to_noise_var(double power, double snr_db) {
  return power / std::pow(10.0, snr_db / 10.0);
}

std::vector<ChannelSample> reobserve_at_snr(const std::vector<ChannelSample>& samples, const PilotMatrix& pilot,
                                            double power, double snr_db, std::uint64_t seed,
                                            std::uint64_t salt) {
  const double noise_var = snr_to_noise_var(power, snr_db);
  RngStream base(seed);
  std::vector<ChannelSample> out = samples;
  for (std::size_t i = 0; i < out.size(); ++i) {
    RngStream stream = base.fork(salt * 1000003ULL + i);
    out[i].noise_var = noise_var;
    out[i].y = observe(pilot, out[i].h, noise_var, stream);
  }
  return out;
}

}  // namespace ogsbl
