#pragma once

#include "fastwbc/env/env.hpp"

#include <cstddef>
#include <filesystem>
#include <functional>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

namespace fastwbc::config {

struct ArchConfig {
  std::vector<std::size_t> hidden{64, 64, 32};
  std::size_t experts = 4;
  std::vector<std::size_t> residual_hidden{64, 64, 32};
  double init_log_std = 0.0;
  double final_gain = 0.01;
};

struct PpoConfig {
  std::size_t n_envs = 256;
  std::size_t steps_per_env = 24;
  int epochs = 5;
  int minibatches = 4;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  // Multiplies the per-step reward before returns and advantages are formed.
  // The control period keeps value gradients from swamping the shared clip.
  double reward_scale = 0.02;
  double clip = 0.2;
  double value_coeff = 1.0;
  double entropy_coeff = 1e-2;
  double lr_init = 1e-3;
  double lr_max = 1e-2;
  double lr_min = 1e-5;
  double desired_kl = 0.01;
  double max_grad_norm = 1.0;
  double lambda_p = 1e-7;
  double lambda_k = 1e-4;
  double parseval_s = 2.0;
  bool adv_norm = true;
  bool obs_norm = true;
  int iterations = 500;
  // Stop early once the periodic train-mode snapshot reaches this Succ (%);
  // 0 disables.
  double stop_succ = 0.0;
};

struct AdaptConfig {
  int iterations = 150;
  double residual_final_gain = 0.01;
};

struct SamplerConfig {
  std::size_t clip_len = 100;
  double floor = 0.05;
  int update_interval = 50;
  bool adaptive = true;
};

struct EvalConfig {
  int episodes_per_clip = 10;
  std::string mode = "train";
  bool domain_rand = true;
  int snapshot_interval = 50;  // training iterations between Succ snapshots; 0 disables
  int snapshot_episodes = 2;   // episodes per clip in a snapshot
  bool rmse = false;           // E_mpjpe as RMSE instead of MAE
};

struct RunConfig {
  env::EnvConfig env;
  ArchConfig arch;
  PpoConfig ppo;
  AdaptConfig adapt;
  SamplerConfig sampler;
  EvalConfig eval;
  double contact_thresh = 0.01;
  double clearance = 0.0;

  void validate() const;
};

// One documented configuration key.
struct KeyInfo {
  std::string section;
  std::string key;
  std::string doc;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;

  std::string path() const { return section + "." + key; }
};

const std::vector<KeyInfo>& registry();

// Sets section.key from its text form; throws ValidationError for unknown
// keys or malformed values.
void set_value(RunConfig& cfg, const std::string& path, const std::string& value);
std::string get_value(const RunConfig& cfg, const std::string& path);

// INI-style file: [section] headers, key = value lines, '#' or ';' comments.
RunConfig load_config(const std::filesystem::path& path);
void apply_config_file(RunConfig& cfg, const std::filesystem::path& path);
std::string to_ini(const RunConfig& cfg);

// Flat {"section.key": "value"} object in registry order.
nlohmann::json to_json(const RunConfig& cfg);
RunConfig from_json(const nlohmann::json& j);

// Every key with its default and description, for --help output.
std::string help_text();

}  // namespace fastwbc::config
