#include "ogsbl/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace ogsbl {

using nlohmann::json;

namespace {

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void load_section(const json& j, const char* name, const std::function<void(const json&)>& fn) {
  if (j.contains(name)) fn(j.at(name));
}

}  // namespace

ExperimentConfig default_config() { return ExperimentConfig{}; }

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["geometry"] = {{"n_antennas", c.geometry.n_antennas}, {"spacing_ratio", c.geometry.spacing_ratio}};
  j["grid_size"] = c.grid_size;
  j["pilot_length"] = c.pilot_length;
  j["power"] = c.power;
  j["train_snr_db"] = c.train_snr_db;
  j["snr_db_list"] = c.snr_db_list;
  j["ray_min"] = c.ray_min;
  j["ray_max"] = c.ray_max;
  j["rays_per_cluster"] = c.rays_per_cluster;
  j["gain_var"] = c.gain_var;
  j["angle_spread_deg"] = c.angle_spread_deg;
  j["center_margin_deg"] = c.center_margin_deg;
  j["dataset_sizes"] = {{"train", c.sizes.train}, {"val", c.sizes.val}, {"test", c.sizes.test}};
  j["sbl"] = {{"a", c.sbl.a},
              {"b", c.sbl.b},
              {"delta", c.sbl.delta},
              {"max_iters", c.sbl.max_iters},
              {"step_beta", c.sbl.step_beta},
              {"support_ratio", c.sbl.support_ratio},
              {"gamma_cap", c.sbl.gamma_cap},
              {"recompute_gamma_posterior", c.sbl.recompute_gamma_posterior},
              {"beta_backtracking", c.sbl.beta_backtracking}};
  j["codec_mode"] = c.codec_mode;
  j["action_scales"] = {{"ab_max", c.scales.ab_max},     {"c1_scale", c.scales.c1_scale},
                        {"w1_scale", c.scales.w1_scale}, {"b1_scale", c.scales.b1_scale},
                        {"w2_scale", c.scales.w2_scale}, {"b2_scale", c.scales.b2_scale},
                        {"b3_scale", c.scales.b3_scale}, {"o1_scale", c.scales.o1_scale},
                        {"o2_scale", c.scales.o2_scale}};
  j["ddpg"] = {{"discount", c.ddpg.discount},
               {"soft_tau", c.ddpg.soft_tau},
               {"batch_size", c.ddpg.batch_size},
               {"actor_lr", c.ddpg.actor_lr},
               {"critic_lr", c.ddpg.critic_lr},
               {"halting_lr", c.ddpg.halting_lr},
               {"noise_sigma_start", c.ddpg.noise_sigma_start},
               {"noise_sigma_end", c.ddpg.noise_sigma_end},
               {"update_period", c.ddpg.update_period},
               {"hard_copy_period", c.ddpg.hard_copy_period},
               {"buffer_capacity", c.ddpg.buffer_capacity},
               {"actor_hidden", c.ddpg.actor_hidden},
               {"critic_hidden", c.ddpg.critic_hidden},
               {"halting_hidden", c.ddpg.halting_hidden}};
  j["env"] = {{"max_layers", c.env.max_layers}, {"epsilon", c.env.epsilon},
              {"eta_pen", c.env.eta_pen},       {"rho", c.env.rho},
              {"lambda_halt", c.env.lambda_halt}, {"discount", c.env.discount},
              {"log_clip", c.env.log_clip}};
  j["halting_mode"] = c.halting_mode;
  j["episodes"] = c.episodes;
  j["val_period"] = c.val_period;
  j["val_episodes"] = c.val_episodes;
  j["lr_schedule"] = c.lr_schedule;
  j["lr_decay_start"] = c.lr_decay_start;
  j["lr_decay_end"] = c.lr_decay_end;
  j["epsilon_sweep"] = c.epsilon_sweep;
  j["eval_snr_db"] = c.eval_snr_db;
  j["fixed_depth_min"] = c.fixed_depth_min;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["wall_clock"] = c.wall_clock;
  return j.dump(2);
}

ExperimentConfig config_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw IoError(std::string("config parse error: ") + e.what());
  }
  ExperimentConfig c;
  load_section(j, "geometry", [&](const json& s) {
    maybe(s, "n_antennas", c.geometry.n_antennas);
    maybe(s, "spacing_ratio", c.geometry.spacing_ratio);
  });
  maybe(j, "grid_size", c.grid_size);
  maybe(j, "pilot_length", c.pilot_length);
  maybe(j, "power", c.power);
  maybe(j, "train_snr_db", c.train_snr_db);
  maybe(j, "snr_db_list", c.snr_db_list);
  maybe(j, "ray_min", c.ray_min);
  maybe(j, "ray_max", c.ray_max);
  maybe(j, "rays_per_cluster", c.rays_per_cluster);
  maybe(j, "gain_var", c.gain_var);
  maybe(j, "angle_spread_deg", c.angle_spread_deg);
  maybe(j, "center_margin_deg", c.center_margin_deg);
  load_section(j, "dataset_sizes", [&](const json& s) {
    maybe(s, "train", c.sizes.train);
    maybe(s, "val", c.sizes.val);
    maybe(s, "test", c.sizes.test);
  });
  load_section(j, "sbl", [&](const json& s) {
    maybe(s, "a", c.sbl.a);
    maybe(s, "b", c.sbl.b);
    maybe(s, "delta", c.sbl.delta);
    maybe(s, "max_iters", c.sbl.max_iters);
    maybe(s, "step_beta", c.sbl.step_beta);
    maybe(s, "support_ratio", c.sbl.support_ratio);
    maybe(s, "gamma_cap", c.sbl.gamma_cap);
    maybe(s, "recompute_gamma_posterior", c.sbl.recompute_gamma_posterior);
    maybe(s, "beta_backtracking", c.sbl.beta_backtracking);
  });
  maybe(j, "codec_mode", c.codec_mode);
  load_section(j, "action_scales", [&](const json& s) {
    maybe(s, "ab_max", c.scales.ab_max);
    maybe(s, "c1_scale", c.scales.c1_scale);
    maybe(s, "w1_scale", c.scales.w1_scale);
    maybe(s, "b1_scale", c.scales.b1_scale);
    maybe(s, "w2_scale", c.scales.w2_scale);
    maybe(s, "b2_scale", c.scales.b2_scale);
    maybe(s, "b3_scale", c.scales.b3_scale);
    maybe(s, "o1_scale", c.scales.o1_scale);
    maybe(s, "o2_scale", c.scales.o2_scale);
  });
  load_section(j, "ddpg", [&](const json& s) {
    maybe(s, "discount", c.ddpg.discount);
    maybe(s, "soft_tau", c.ddpg.soft_tau);
    maybe(s, "batch_size", c.ddpg.batch_size);
    maybe(s, "actor_lr", c.ddpg.actor_lr);
    maybe(s, "critic_lr", c.ddpg.critic_lr);
    maybe(s, "halting_lr", c.ddpg.halting_lr);
    maybe(s, "noise_sigma_start", c.ddpg.noise_sigma_start);
    maybe(s, "noise_sigma_end", c.ddpg.noise_sigma_end);
    maybe(s, "update_period", c.ddpg.update_period);
    maybe(s, "hard_copy_period", c.ddpg.hard_copy_period);
    maybe(s, "buffer_capacity", c.ddpg.buffer_capacity);
    maybe(s, "actor_hidden", c.ddpg.actor_hidden);
    maybe(s, "critic_hidden", c.ddpg.critic_hidden);
    maybe(s, "halting_hidden", c.ddpg.halting_hidden);
  });
  load_section(j, "env", [&](const json& s) {
    maybe(s, "max_layers", c.env.max_layers);
    maybe(s, "epsilon", c.env.epsilon);
    maybe(s, "eta_pen", c.env.eta_pen);
    maybe(s, "rho", c.env.rho);
    maybe(s, "lambda_halt", c.env.lambda_halt);
    maybe(s, "discount", c.env.discount);
    maybe(s, "log_clip", c.env.log_clip);
  });
  maybe(j, "halting_mode", c.halting_mode);
  maybe(j, "episodes", c.episodes);
  maybe(j, "val_period", c.val_period);
  maybe(j, "val_episodes", c.val_episodes);
  maybe(j, "lr_schedule", c.lr_schedule);
  maybe(j, "lr_decay_start", c.lr_decay_start);
  maybe(j, "lr_decay_end", c.lr_decay_end);
  maybe(j, "epsilon_sweep", c.epsilon_sweep);
  maybe(j, "eval_snr_db", c.eval_snr_db);
  maybe(j, "fixed_depth_min", c.fixed_depth_min);
  maybe(j, "seed", c.seed);
  maybe(j, "output_dir", c.output_dir);
  maybe(j, "wall_clock", c.wall_clock);

  if (c.snr_db_list.empty()) throw IoError("config: snr_db_list must not be empty");
  if (c.ray_min < 1 || c.ray_max < c.ray_min) throw IoError("config: bad ray count range");
  codec_mode_from_string(c.codec_mode);  // validate
  if (c.halting_mode != "score" && c.halting_mode != "tau") {
    throw IoError("config: halting_mode must be 'score' or 'tau'");
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config file: " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return config_from_json_text(ss.str());
}

}  // namespace ogsbl
