#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ogsbl/environment.hpp"

namespace ogsbl {

struct DatasetSizes {
  int train = 2000;
  int val = 200;
  int test = 200;
};

/// Every knob of the simulator, serializable as a JSON document. Values
/// here are the desk-scale defaults; the full-scale reference setup
/// (N = 128, Jhat = 400, T = 60..100) is reachable through the same keys.
struct ExperimentConfig {
  ArrayGeometry geometry;  // N = 32, d/lambda = 0.5
  int grid_size = 64;
  int pilot_length = 16;
  double power = 1.0;
  double train_snr_db = 20.0;
  std::vector<double> snr_db_list{0.0, 5.0, 10.0, 15.0, 20.0};
  int ray_min = 3;
  int ray_max = 8;
  int rays_per_cluster = 1;
  double gain_var = 1.0;
  double angle_spread_deg = 2.0;
  double center_margin_deg = 5.0;
  DatasetSizes sizes;

  SblHyper sbl;
  std::string codec_mode = "diagonal-plus-rank1";
  ActionScales scales;
  DdpgConfig ddpg;
  EnvConfig env;
  std::string halting_mode = "score";  // or "tau"

  int episodes = 2000;
  int val_period = 200;
  int val_episodes = 64;
  std::string lr_schedule = "constant";  // or "decay"
  double lr_decay_start = 1e-2;
  double lr_decay_end = 1e-4;

  std::vector<double> epsilon_sweep{0.4, 0.3, 0.2, 0.1};
  double eval_snr_db = 20.0;
  int fixed_depth_min = 2;

  std::uint64_t seed = 1;
  std::string output_dir = "out";
  bool wall_clock = false;  // measured seconds in CSV break bitwise reruns
};

ExperimentConfig default_config();

/// Defaults overlaid with any keys present in the file.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig config_from_json_text(const std::string& text);

/// Full dump of every key, suitable as the generated reference file.
std::string config_to_json(const ExperimentConfig& config);

}  // namespace ogsbl
