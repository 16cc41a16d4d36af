#include "ogsbl/harness.hpp"

#include <chrono>
#include <filesystem>
#include <ostream>

#include "ogsbl/dataset_io.hpp"

namespace ogsbl {

namespace {

double elapsed_or_zero(const ExperimentConfig& config,
                       const std::chrono::steady_clock::time_point& start) {
  if (!config.wall_clock) return 0.0;  // keeps CSV output reproducible
  const auto end = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(end - start).count();
}

}  // namespace

Dataset make_dataset(const ExperimentConfig& config, int split, int n_samples) {
  Dataset d;
  d.geometry = config.geometry;
  d.grid = Grid::uniform(config.grid_size);
  d.seed = config.seed + static_cast<std::uint64_t>(split);

  // One pilot block per experiment; every split shares it.
  RngStream pilot_rng = RngStream(config.seed).fork(7001);
  d.pilot = generate_pilots(config.pilot_length, d.geometry, config.power, pilot_rng);

  const double noise_var = snr_to_noise_var(config.power, config.train_snr_db);
  RngStream base(d.seed);
  const double deg = std::numbers::pi / 180.0;
  d.samples.reserve(static_cast<std::size_t>(n_samples));
  for (int i = 0; i < n_samples; ++i) {
    RngStream stream = base.fork(static_cast<std::uint64_t>(i));
    ChannelGenConfig gen;
    const int rays = config.ray_min + static_cast<int>(stream.integer(
                         static_cast<std::uint64_t>(config.ray_max - config.ray_min + 1)));
    gen.n_clusters = std::max(1, rays / config.rays_per_cluster);
    gen.rays_per_cluster = config.rays_per_cluster;
    gen.gain_var = config.gain_var;
    gen.angle_spread = config.angle_spread_deg * deg;
    gen.center_margin = config.center_margin_deg * deg;
    ChannelSample s = generate_channel(d.geometry, gen, stream);
    s.noise_var = noise_var;
    s.y = observe(d.pilot, s.h, noise_var, stream);
    d.samples.push_back(std::move(s));
  }
  return d;
}

GeneratedPaths cli_generate(const ExperimentConfig& config, std::ostream& log) {
  std::filesystem::create_directories(config.output_dir);
  GeneratedPaths paths;
  paths.train = config.output_dir + "/dataset_train.bin";
  paths.val = config.output_dir + "/dataset_val.bin";
  paths.test = config.output_dir + "/dataset_test.bin";

  write_dataset(make_dataset(config, 0, config.sizes.train), paths.train);
  write_dataset(make_dataset(config, 1, config.sizes.val), paths.val);
  write_dataset(make_dataset(config, 2, config.sizes.test), paths.test);
  log << "wrote " << paths.train << " (" << config.sizes.train << " samples), " << paths.val << " ("
      << config.sizes.val << "), " << paths.test << " (" << config.sizes.test << ")\n";
  return paths;
}

std::vector<MetricsRow> cli_run_sbl(const ExperimentConfig& config, const std::string& dataset_path,
                                    std::ostream& log) {
  const Dataset data = read_dataset(dataset_path);
  std::vector<MetricsRow> rows;
  for (std::size_t si = 0; si < config.snr_db_list.size(); ++si) {
    const double snr_db = config.snr_db_list[si];
    const auto samples =
        reobserve_at_snr(data.samples, data.pilot, config.power, snr_db, config.seed, 9000 + si);
    for (const bool offgrid : {true, false}) {
      const auto start = std::chrono::steady_clock::now();
      const EvalDetail d = evaluate_sbl(samples, data.pilot, data.grid, data.geometry, config.sbl, offgrid);
      MetricsRow row;
      row.scheme = offgrid ? "sbl_offgrid" : "sbl_standard";
      row.sweep_var = "snr_db";
      row.sweep_value = snr_db;
      row.nmse_linear = d.nmse_mean;
      row.mean_layers = d.mean_layers;
      row.histogram = d.histogram;
      row.seconds = elapsed_or_zero(config, start);
      rows.push_back(std::move(row));
      log << (offgrid ? "sbl_offgrid" : "sbl_standard") << " snr " << snr_db << " dB nmse_db "
          << to_db(d.nmse_mean) << " iters " << d.mean_layers << "\n";
    }
  }
  return rows;
}

namespace {

int train_common(const ExperimentConfig& config, TransitionKind kind, const std::string& train_path,
                 const std::string& val_path, const std::string& checkpoint_path, std::ostream& log) {
  const Dataset train_set = read_dataset(train_path);
  const Dataset val_set = read_dataset(val_path);
  const TrainOutcome outcome = train_agent(config, kind, train_set, val_set, &log);
  if (outcome.diverged) {
    log << "training aborted: " << outcome.diagnostic << "\n";
    return 3;
  }
  write_checkpoint(outcome.best, checkpoint_path);
  log << "best val nmse_db " << to_db(outcome.best_val_nmse) << " mean layers " << outcome.best_val_layers
      << "; checkpoint " << checkpoint_path << "\n";
  return 0;
}

}  // namespace

int cli_train(const ExperimentConfig& config, const std::string& train_path, const std::string& val_path,
              const std::string& checkpoint_path, std::ostream& log) {
  return train_common(config, TransitionKind::unfolded, train_path, val_path, checkpoint_path, log);
}

int cli_blackbox(const ExperimentConfig& config, const std::string& train_path, const std::string& val_path,
                 const std::string& checkpoint_path, std::ostream& log) {
  return train_common(config, TransitionKind::blackbox, train_path, val_path, checkpoint_path, log);
}

std::vector<MetricsRow> cli_evaluate(const ExperimentConfig& config, const std::string& checkpoint_path,
                                     const std::string& dataset_path, const std::string& sweep,
                                     std::ostream& log) {
  const Dataset data = read_dataset(dataset_path);
  const Checkpoint ckpt = read_checkpoint(checkpoint_path);
  auto [problem, agent] = restore_agent(ckpt, data);
  const std::string scheme =
      problem.kind == TransitionKind::blackbox ? "ddpg_blackbox" : "ddpg_unfolding";

  std::vector<MetricsRow> rows;
  auto push_row = [&](const std::string& scheme_name, const std::string& var, double value,
                      const EvalDetail& d, double seconds) {
    MetricsRow row;
    row.scheme = scheme_name;
    row.sweep_var = var;
    row.sweep_value = value;
    row.nmse_linear = d.nmse_mean;
    row.mean_layers = d.mean_layers;
    row.histogram = d.histogram;
    row.seconds = seconds;
    rows.push_back(std::move(row));
    log << scheme_name << " " << var << " " << value << " nmse_db " << to_db(d.nmse_mean) << " layers "
        << d.mean_layers << "\n";
  };

  if (sweep == "epsilon") {
    for (double eps : config.epsilon_sweep) {
      const auto start = std::chrono::steady_clock::now();
      const EvalDetail d = evaluate_adaptive(agent, problem, data.samples, eps);
      push_row(scheme, "epsilon", eps, d, elapsed_or_zero(config, start));
    }
  } else if (sweep == "depth") {
    {
      const auto start = std::chrono::steady_clock::now();
      const EvalDetail d = evaluate_adaptive(agent, problem, data.samples, config.env.epsilon);
      push_row(scheme + "_adaptive", "depth", d.mean_layers, d, elapsed_or_zero(config, start));
    }
    for (int depth = config.fixed_depth_min; depth <= config.env.max_layers; ++depth) {
      const auto start = std::chrono::steady_clock::now();
      const EvalDetail d = evaluate_fixed_depth(agent, problem, data.samples, depth);
      push_row(scheme + "_fixed", "depth", depth, d, elapsed_or_zero(config, start));
    }
  } else if (sweep == "snr") {
    for (std::size_t si = 0; si < config.snr_db_list.size(); ++si) {
      const double snr_db = config.snr_db_list[si];
      const auto samples =
          reobserve_at_snr(data.samples, data.pilot, config.power, snr_db, config.seed, 9000 + si);
      const auto start = std::chrono::steady_clock::now();
      const EvalDetail d = evaluate_adaptive(agent, problem, samples, config.env.epsilon);
      push_row(scheme, "snr_db", snr_db, d, elapsed_or_zero(config, start));
    }
  } else {
    throw IoError("unknown sweep '" + sweep + "' (expected epsilon, depth, or snr)");
  }
  return rows;
}

std::pair<Problem, std::vector<ChannelSample>> zero_pad_problem(const Problem& trained,
                                                                const Dataset& small_dataset) {
  if (small_dataset.geometry.n_antennas != trained.geom.n_antennas) {
    throw DimensionError("zero_pad_problem: antenna counts must match the trained model");
  }
  if (small_dataset.pilot.length > trained.pilot.length ||
      small_dataset.grid.size() > trained.grid.size()) {
    throw DimensionError("zero_pad_problem: smaller dimensions must not exceed trained dimensions");
  }

  Problem padded = trained;
  padded.active_cols = small_dataset.grid.size();
  padded.inner_grid = small_dataset.grid;
  padded.pilot.length = trained.pilot.length;
  padded.pilot.power = small_dataset.pilot.power;
  padded.pilot.x = MatC::Zero(trained.pilot.length, trained.geom.n_antennas);
  padded.pilot.x.topRows(small_dataset.pilot.length) = small_dataset.pilot.x;

  std::vector<ChannelSample> samples = small_dataset.samples;
  for (ChannelSample& s : samples) {
    VecC y = VecC::Zero(trained.pilot.length);
    y.head(s.y.size()) = s.y;
    s.y = std::move(y);
  }
  return {std::move(padded), std::move(samples)};
}

std::vector<MetricsRow> cli_zero_pad_eval(const ExperimentConfig& config, const std::string& checkpoint_path,
                                          const std::string& small_dataset_path,
                                          const std::string& matched_dataset_path, std::ostream& log) {
  const Dataset small = read_dataset(small_dataset_path);
  const Checkpoint ckpt = read_checkpoint(checkpoint_path);
  auto [problem, agent] = restore_agent(ckpt);
  const std::string scheme =
      problem.kind == TransitionKind::blackbox ? "ddpg_blackbox" : "ddpg_unfolding";

  std::vector<MetricsRow> rows;
  auto push_row = [&](const std::string& scheme_name, double value, const EvalDetail& d, double seconds) {
    MetricsRow row;
    row.scheme = scheme_name;
    row.sweep_var = "pilot_length";
    row.sweep_value = value;
    row.nmse_linear = d.nmse_mean;
    row.mean_layers = d.mean_layers;
    row.histogram = d.histogram;
    row.seconds = seconds;
    rows.push_back(std::move(row));
  };

  if (!matched_dataset_path.empty()) {
    const Dataset matched = read_dataset(matched_dataset_path);
    auto [mp, magent] = restore_agent(ckpt, matched);
    const auto start = std::chrono::steady_clock::now();
    const EvalDetail d = evaluate_adaptive(magent, mp, matched.samples, config.env.epsilon);
    push_row(scheme + "_matched", matched.pilot.length, d, elapsed_or_zero(config, start));
    log << "matched nmse_db " << to_db(d.nmse_mean) << " layers " << d.mean_layers << "\n";
  }

  auto [padded, samples] = zero_pad_problem(problem, small);
  const auto start = std::chrono::steady_clock::now();
  const EvalDetail d = evaluate_adaptive(agent, padded, samples, config.env.epsilon);
  push_row(scheme + "_zeropad", small.pilot.length, d, elapsed_or_zero(config, start));
  log << "zeropad nmse_db " << to_db(d.nmse_mean) << " layers " << d.mean_layers << "\n";
  return rows;
}

}  // namespace ogsbl
