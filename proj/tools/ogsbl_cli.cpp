#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "ogsbl/harness.hpp"

using namespace ogsbl;

namespace {

ExperimentConfig resolve_config(const std::string& config_path, std::uint64_t* seed_override,
                                std::string* output_override) {
  ExperimentConfig config = config_path.empty() ? default_config() : load_config(config_path);
  if (seed_override) config.seed = *seed_override;
  if (output_override && !output_override->empty()) config.output_dir = *output_override;
  return config;
}

void write_rows(const ExperimentConfig& config, const std::vector<MetricsRow>& rows,
                const std::string& out_path) {
  std::filesystem::create_directories(std::filesystem::path(out_path).parent_path().string().empty()
                                          ? "."
                                          : std::filesystem::path(out_path).parent_path().string());
  write_text_file(out_path, metrics_csv(rows));
  std::cout << "wrote " << out_path << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Off-grid SBL channel estimation with DDPG-driven adaptive-depth unfolding"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  app.add_option("--config", config_path, "JSON config file (defaults used when omitted)");
  app.add_option("--output-dir", output_dir, "Override the config's output directory");
  app.add_option_function<std::uint64_t>(
         "--seed", [&](std::uint64_t s) { seed = s; seed_set = true; }, "Override the config's seed");

  auto* gen = app.add_subcommand("generate", "Write train/val/test datasets");

  auto* runsbl = app.add_subcommand("run-sbl", "Run the SBL baselines over the SNR sweep");
  std::string dataset_path, out_csv;
  runsbl->add_option("--dataset", dataset_path, "Dataset file")->required();
  runsbl->add_option("--out", out_csv, "Output CSV path");

  auto* train = app.add_subcommand("train", "Train the DDPG-driven unfolding agent");
  std::string train_path, val_path, ckpt_path;
  train->add_option("--train-dataset", train_path, "Training dataset")->required();
  train->add_option("--val-dataset", val_path, "Validation dataset")->required();
  train->add_option("--checkpoint", ckpt_path, "Checkpoint output path");

  auto* blackbox = app.add_subcommand("blackbox", "Train the black-box DNN agent");
  std::string bb_train, bb_val, bb_ckpt;
  blackbox->add_option("--train-dataset", bb_train, "Training dataset")->required();
  blackbox->add_option("--val-dataset", bb_val, "Validation dataset")->required();
  blackbox->add_option("--checkpoint", bb_ckpt, "Checkpoint output path");

  auto* evaluate = app.add_subcommand("evaluate", "Evaluate a checkpoint over a sweep");
  std::string eval_ckpt, eval_dataset, sweep = "epsilon", eval_csv;
  evaluate->add_option("--checkpoint", eval_ckpt, "Trained checkpoint")->required();
  evaluate->add_option("--dataset", eval_dataset, "Dataset file")->required();
  evaluate->add_option("--sweep", sweep, "epsilon | depth | snr");
  evaluate->add_option("--out", eval_csv, "Output CSV path");

  auto* zeropad = app.add_subcommand("zero-pad-eval", "Evaluate a checkpoint on a smaller padded problem");
  std::string zp_ckpt, zp_small, zp_matched, zp_csv;
  zeropad->add_option("--checkpoint", zp_ckpt, "Trained checkpoint")->required();
  zeropad->add_option("--dataset", zp_small, "Smaller-dimension dataset")->required();
  zeropad->add_option("--matched-dataset", zp_matched, "Optional dataset at trained dimensions");
  zeropad->add_option("--out", zp_csv, "Output CSV path");

  auto* defaults = app.add_subcommand("default-config", "Write the reference config with all defaults");
  std::string defaults_out = "config_reference.json";
  defaults->add_option("--out", defaults_out, "Output path");

  CLI11_PARSE(app, argc, argv);

  try {
    ExperimentConfig config = resolve_config(config_path, seed_set ? &seed : nullptr, &output_dir);
    std::filesystem::create_directories(config.output_dir);

    if (gen->parsed()) {
      cli_generate(config, std::cout);
    } else if (runsbl->parsed()) {
      const auto rows = cli_run_sbl(config, dataset_path, std::cout);
      write_rows(config, rows, out_csv.empty() ? config.output_dir + "/sbl_baselines.csv" : out_csv);
    } else if (train->parsed()) {
      const std::string out = ckpt_path.empty() ? config.output_dir + "/unfolding.ckpt" : ckpt_path;
      const int rc = cli_train(config, train_path, val_path, out, std::cout);
      if (rc != 0) return rc;
    } else if (blackbox->parsed()) {
      const std::string out = bb_ckpt.empty() ? config.output_dir + "/blackbox.ckpt" : bb_ckpt;
      const int rc = cli_blackbox(config, bb_train, bb_val, out, std::cout);
      if (rc != 0) return rc;
    } else if (evaluate->parsed()) {
      const auto rows = cli_evaluate(config, eval_ckpt, eval_dataset, sweep, std::cout);
      write_rows(config, rows,
                 eval_csv.empty() ? config.output_dir + "/evaluate_" + sweep + ".csv" : eval_csv);
    } else if (zeropad->parsed()) {
      const auto rows = cli_zero_pad_eval(config, zp_ckpt, zp_small, zp_matched, std::cout);
      write_rows(config, rows, zp_csv.empty() ? config.output_dir + "/zero_pad.csv" : zp_csv);
    } else if (defaults->parsed()) {
      write_text_file(defaults_out, config_to_json(default_config()) + "\n");
      std::cout << "wrote " << defaults_out << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
