#include "fastwbc/config/run_config.hpp"

#include "fastwbc/error.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cstdio>
#include <map>
#include <sstream>

namespace fastwbc::config {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(trim(item));
  return parts;
}

std::string format(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  // Prefer the shortest text that reads back exactly.
  for (int prec = 1; prec < 17; ++prec) {
    char shorter[32];
    std::snprintf(shorter, sizeof shorter, "%.*g", prec, v);
    if (std::strtod(shorter, nullptr) == v) return shorter;
  }
  return buf;
}
std::string format(bool v) { return v ? "true" : "false"; }
std::string format(int v) { return std::to_string(v); }
std::string format(std::size_t v) { return std::to_string(v); }
std::string format(const std::string& v) { return v; }
std::string format(const env::Vec2& v) { return format(v(0)) + "," + format(v(1)); }
std::string format(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

[[noreturn]] void bad(const std::string& text, const char* what) {
  throw ValidationError("cannot parse '" + text + "' as " + what);
}

double parse_double(const std::string& t) {
  const std::string s = trim(t);
  double v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) bad(t, "a number");
  return v;
}

long parse_long(const std::string& t) {
  const std::string s = trim(t);
  long v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) bad(t, "an integer");
  return v;
}

void parse(const std::string& t, double& out) { out = parse_double(t); }
void parse(const std::string& t, int& out) { out = static_cast<int>(parse_long(t)); }
void parse(const std::string& t, std::size_t& out) {
  const long v = parse_long(t);
  if (v < 0) bad(t, "a non-negative integer");
  out = static_cast<std::size_t>(v);
}
void parse(const std::string& t, bool& out) {
  const std::string s = trim(t);
  if (s == "true" || s == "1" || s == "on") out = true;
  else if (s == "false" || s == "0" || s == "off") out = false;
  else bad(t, "a boolean");
}
void parse(const std::string& t, std::string& out) { out = trim(t); }
void parse(const std::string& t, env::Vec2& out) {
  const auto parts = split(t);
  if (parts.size() != 2) bad(t, "two comma-separated numbers");
  out = env::Vec2(parse_double(parts[0]), parse_double(parts[1]));
}
void parse(const std::string& t, std::vector<std::size_t>& out) {
  std::vector<std::size_t> v;
  for (const auto& p : split(t)) {
    std::size_t x = 0;
    parse(p, x);
    v.push_back(x);
  }
  if (v.empty()) bad(t, "a comma-separated list of sizes");
  out = std::move(v);
}

template <typename Access>
void add(std::vector<KeyInfo>& out, const char* section, const char* key, Access access,
         const char* doc) {
  KeyInfo k;
  k.section = section;
  k.key = key;
  k.doc = doc;
  k.get = [access](const RunConfig& c) { return format(access(const_cast<RunConfig&>(c))); };
  k.set = [access](RunConfig& c, const std::string& v) { parse(v, access(c)); };
  out.push_back(std::move(k));
}

#define FIELD(expr) [](RunConfig& c) -> auto& { return c.expr; }

std::vector<KeyInfo> build_registry() {
  std::vector<KeyInfo> r;
  // model
  add(r, "model", "l1", FIELD(env.model.l1), "shank link length [m]");
  add(r, "model", "l2", FIELD(env.model.l2), "torso link length [m]");
  add(r, "model", "m1", FIELD(env.model.m1), "shank mass [kg]");
  add(r, "model", "m2", FIELD(env.model.m2), "torso mass [kg]");
  add(r, "model", "foot_half", FIELD(env.model.foot_half), "foot half-length d_f [m]");
  add(r, "model", "tau_max", FIELD(env.model.tau_max), "torque limits (ankle,hip) [N m]");
  add(r, "model", "kp", FIELD(env.model.kp), "PD stiffness (ankle,hip)");
  add(r, "model", "kd", FIELD(env.model.kd), "PD damping (ankle,hip)");
  add(r, "model", "q_default", FIELD(env.model.q_default), "default joint positions [rad]");
  add(r, "model", "g", FIELD(env.model.g), "gravity [m/s^2]");
  add(r, "model", "joint_lower", FIELD(env.model.joint_lower), "lower joint limits [rad]");
  add(r, "model", "joint_upper", FIELD(env.model.joint_upper), "upper joint limits [rad]");
  // env
  add(r, "env", "mode", FIELD(eval.mode), "termination mode during training: train|eval_2m|eval_1p5m");
  add(r, "env", "dr_joint_offset", FIELD(env.dr.joint_offset), "randomize default joint offsets");
  add(r, "env", "dr_com_offset", FIELD(env.dr.com_offset), "randomize torso CoM x-offset");
  add(r, "env", "dr_push", FIELD(env.dr.push), "random pushes");
  add(r, "env", "joint_offset_range", FIELD(env.dr.joint_offset_range), "default joint offset range [rad]");
  add(r, "env", "com_offset_range", FIELD(env.dr.com_offset_range), "torso CoM x-offset range [m]");
  add(r, "env", "push_vel", FIELD(env.dr.push_vel), "push hip-velocity range [m/s]");
  add(r, "env", "push_interval_min", FIELD(env.dr.push_interval_min), "min push interval [s]");
  add(r, "env", "push_interval_max", FIELD(env.dr.push_interval_max), "max push interval [s]");
  add(r, "env", "contact_thresh", FIELD(contact_thresh), "contact height threshold [m]");
  add(r, "env", "clearance", FIELD(clearance), "foot clearance for height adjustment [m]");
  // reward
  add(r, "reward", "joint_pos", FIELD(env.weights.joint_pos), "joint position weight");
  add(r, "reward", "joint_pos_sigma_sq", FIELD(env.weights.joint_pos_sigma_sq), "joint position sigma^2");
  add(r, "reward", "body_pos", FIELD(env.weights.body_pos), "body position weight");
  add(r, "reward", "body_pos_sigma_sq", FIELD(env.weights.body_pos_sigma_sq), "body position sigma^2");
  add(r, "reward", "body_orient", FIELD(env.weights.body_orient), "body orientation weight");
  add(r, "reward", "body_orient_sigma_sq", FIELD(env.weights.body_orient_sigma_sq), "body orientation sigma^2");
  add(r, "reward", "body_linvel", FIELD(env.weights.body_linvel), "body linear velocity weight");
  add(r, "reward", "body_linvel_sigma_sq", FIELD(env.weights.body_linvel_sigma_sq), "body linear velocity sigma^2");
  add(r, "reward", "body_angvel", FIELD(env.weights.body_angvel), "body angular velocity weight");
  add(r, "reward", "body_angvel_sigma_sq", FIELD(env.weights.body_angvel_sigma_sq), "body angular velocity sigma^2");
  add(r, "reward", "anchor_pos", FIELD(env.weights.anchor_pos), "anchor position weight");
  add(r, "reward", "anchor_pos_sigma_sq", FIELD(env.weights.anchor_pos_sigma_sq), "anchor position sigma^2");
  add(r, "reward", "anchor_orient", FIELD(env.weights.anchor_orient), "anchor orientation weight");
  add(r, "reward", "anchor_orient_sigma_sq", FIELD(env.weights.anchor_orient_sigma_sq), "anchor orientation sigma^2");
  add(r, "reward", "contact", FIELD(env.weights.contact), "contact mask weight");
  add(r, "reward", "action_smooth", FIELD(env.weights.action_smooth), "action smoothness weight");
  add(r, "reward", "self_contact", FIELD(env.weights.self_contact), "ground collision of non-foot keypoints");
  add(r, "reward", "balance", FIELD(env.weights.balance), "balance penalty magnitude");
  add(r, "reward", "balance_threshold", FIELD(env.weights.balance_threshold), "balance CoM-CoP threshold [m]");
  add(r, "reward", "balance_divisor", FIELD(env.weights.balance_divisor), "balance divisor");
  add(r, "reward", "termination", FIELD(env.weights.termination), "termination penalty");
  add(r, "reward", "joint_limit", FIELD(env.weights.joint_limit), "joint limit penalty");
  add(r, "reward", "track_tau", FIELD(env.adaptive.tau), "w_track threshold tau [m]");
  add(r, "reward", "track_kappa", FIELD(env.adaptive.kappa), "w_track decay kappa [m]");
  add(r, "reward", "track_w_min", FIELD(env.adaptive.w_min), "w_track floor");
  add(r, "reward", "use_w_track", FIELD(env.flags.use_w_track), "apply the adaptive tracking weight");
  add(r, "reward", "use_balance", FIELD(env.flags.use_balance), "apply the balance penalty");
  add(r, "reward", "balance_sign_literal", FIELD(env.flags.balance_sign_literal), "use the literal table sign for balance");
  // ppo
  add(r, "ppo", "n_envs", FIELD(ppo.n_envs), "parallel environments");
  add(r, "ppo", "steps_per_env", FIELD(ppo.steps_per_env), "rollout steps per env");
  add(r, "ppo", "epochs", FIELD(ppo.epochs), "learning epochs per update");
  add(r, "ppo", "minibatches", FIELD(ppo.minibatches), "minibatches per epoch");
  add(r, "ppo", "gamma", FIELD(ppo.gamma), "discount");
  add(r, "ppo", "gae_lambda", FIELD(ppo.gae_lambda), "GAE lambda");
  add(r, "ppo", "reward_scale", FIELD(ppo.reward_scale), "per-step reward multiplier used for returns");
  add(r, "ppo", "clip", FIELD(ppo.clip), "surrogate clip range");
  add(r, "ppo", "value_coeff", FIELD(ppo.value_coeff), "value loss coefficient");
  add(r, "ppo", "entropy_coeff", FIELD(ppo.entropy_coeff), "entropy bonus coefficient");
  add(r, "ppo", "lr_init", FIELD(ppo.lr_init), "initial learning rate");
  add(r, "ppo", "lr_max", FIELD(ppo.lr_max), "max learning rate");
  add(r, "ppo", "lr_min", FIELD(ppo.lr_min), "min learning rate");
  add(r, "ppo", "desired_kl", FIELD(ppo.desired_kl), "desired KL for LR adaptation");
  add(r, "ppo", "max_grad_norm", FIELD(ppo.max_grad_norm), "global gradient norm clip");
  add(r, "ppo", "lambda_p", FIELD(ppo.lambda_p), "Parseval loss weight");
  add(r, "ppo", "lambda_k", FIELD(ppo.lambda_k), "KL penalty weight");
  add(r, "ppo", "parseval_s", FIELD(ppo.parseval_s), "Parseval scaling factor s");
  add(r, "ppo", "adv_norm", FIELD(ppo.adv_norm), "normalize advantages per update");
  add(r, "ppo", "obs_norm", FIELD(ppo.obs_norm), "running observation normalization");
  add(r, "ppo", "iterations", FIELD(ppo.iterations), "base training iterations");
  add(r, "ppo", "stop_succ", FIELD(ppo.stop_succ), "early stop at this snapshot Succ [%] (0 = off)");
  add(r, "ppo", "hidden", FIELD(arch.hidden), "expert hidden sizes");
  add(r, "ppo", "experts", FIELD(arch.experts), "number of experts");
  add(r, "ppo", "init_log_std", FIELD(arch.init_log_std), "initial action log-std");
  add(r, "ppo", "final_gain", FIELD(arch.final_gain), "init gain of output layers");
  // adapt
  add(r, "adapt", "iterations", FIELD(adapt.iterations), "residual adaptation iterations");
  add(r, "adapt", "residual_hidden", FIELD(arch.residual_hidden), "residual hidden sizes");
  add(r, "adapt", "residual_final_gain", FIELD(adapt.residual_final_gain), "init gain of the residual output layer");
  // sampler
  add(r, "sampler", "clip_len", FIELD(sampler.clip_len), "frames per sampling segment");
  add(r, "sampler", "floor", FIELD(sampler.floor), "probability floor");
  add(r, "sampler", "update_interval", FIELD(sampler.update_interval), "iterations between sampler updates");
  add(r, "sampler", "adaptive", FIELD(sampler.adaptive), "failure-driven sampling (off = uniform)");
  // eval
  add(r, "eval", "episodes_per_clip", FIELD(eval.episodes_per_clip), "episodes per clip");
  add(r, "eval", "domain_rand", FIELD(eval.domain_rand), "domain randomization during evaluation");
  add(r, "eval", "snapshot_interval", FIELD(eval.snapshot_interval), "iterations between training Succ snapshots (0 = off)");
  add(r, "eval", "snapshot_episodes", FIELD(eval.snapshot_episodes), "episodes per clip in a snapshot");
  add(r, "eval", "rmse", FIELD(eval.rmse), "E_mpjpe as RMSE instead of MAE");
  return r;
}

#undef FIELD

const KeyInfo& find(const std::string& path) {
  for (const auto& k : registry()) {
    if (k.path() == path) return k;
  }
  throw ValidationError("unknown config key '" + path + "'");
}

}  // namespace

void RunConfig::validate() const {
  env.model.validate();
  env.dr.validate();
  env.weights.validate();
  env.adaptive.validate();
  env::parse_eval_mode(eval.mode);
  const bool ppo_ok = ppo.n_envs > 0 && ppo.steps_per_env > 0 && ppo.epochs > 0 &&
                      ppo.minibatches > 0 && ppo.gamma > 0 && ppo.gamma <= 1 &&
                      ppo.gae_lambda >= 0 && ppo.gae_lambda <= 1 && ppo.clip > 0 && ppo.reward_scale > 0 &&
                      ppo.clip < 1 && ppo.value_coeff >= 0 && ppo.entropy_coeff >= 0 &&
                      ppo.lr_min > 0 && ppo.lr_max >= ppo.lr_min && ppo.lr_init >= ppo.lr_min &&
                      ppo.lr_init <= ppo.lr_max && ppo.desired_kl > 0 && ppo.max_grad_norm > 0 &&
                      ppo.lambda_p >= 0 && ppo.lambda_k >= 0 && ppo.parseval_s > 0 &&
                      ppo.iterations >= 0;
  if (!ppo_ok) throw ValidationError("config [ppo]: values out of range");
  if (ppo.n_envs * ppo.steps_per_env < static_cast<std::size_t>(ppo.minibatches)) {
    throw ValidationError("config [ppo]: fewer transitions than minibatches");
  }
  if (arch.hidden.empty() || arch.residual_hidden.empty() || arch.experts == 0) {
    throw ValidationError("config: network sizes must be non-empty");
  }
  for (auto h : arch.hidden) if (h == 0) throw ValidationError("config: zero hidden width");
  for (auto h : arch.residual_hidden) if (h == 0) throw ValidationError("config: zero hidden width");
  if (adapt.iterations < 0) throw ValidationError("config [adapt]: iterations must be >= 0");
  if (sampler.clip_len < 10) throw ValidationError("config [sampler]: clip_len must be >= 10");
  if (!(sampler.floor > 0) || sampler.update_interval <= 0) {
    throw ValidationError("config [sampler]: floor and update_interval must be positive");
  }
  if (eval.episodes_per_clip <= 0 || eval.snapshot_interval < 0 || eval.snapshot_episodes <= 0) {
    throw ValidationError("config [eval]: episode counts must be positive");
  }
}

const std::vector<KeyInfo>& registry() {
  static const std::vector<KeyInfo> r = build_registry();
  return r;
}

void set_value(RunConfig& cfg, const std::string& path, const std::string& value) {
  const KeyInfo& k = find(path);
  try {
    k.set(cfg, value);
  } catch (const ValidationError& e) {
    throw ValidationError("config key '" + path + "': " + e.what());
  }
}

std::string get_value(const RunConfig& cfg, const std::string& path) { return find(path).get(cfg); }

void apply_config_file(RunConfig& cfg, const std::filesystem::path& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ValidationError("config file: " + std::string(e.what()));
  }
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ValidationError("config file: key '" + section + "' outside any [section]");
    }
    for (const auto& [key, value] : body) set_value(cfg, section + "." + key, value.data());
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  RunConfig cfg;
  apply_config_file(cfg, path);
  cfg.validate();
  return cfg;
}

std::string to_ini(const RunConfig& cfg) {
  std::string out;
  std::string section;
  for (const auto& k : registry()) {
    if (k.section != section) {
      out += (section.empty() ? "" : "\n") + std::string("[") + k.section + "]\n";
      section = k.section;
    }
    out += k.key + " = " + k.get(cfg) + "\n";
  }
  return out;
}

nlohmann::json to_json(const RunConfig& cfg) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& k : registry()) j[k.path()] = k.get(cfg);
  return nlohmann::json::parse(j.dump());
}

RunConfig from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("config snapshot: expected an object");
  RunConfig cfg;
  for (const auto& [path, value] : j.items()) {
    if (!value.is_string()) throw ValidationError("config snapshot: '" + path + "' is not a string");
    set_value(cfg, path, value.get<std::string>());
  }
  cfg.validate();
  return cfg;
}

std::string help_text() {
  const RunConfig defaults;
  std::string out = "Config keys (section.key = default):\n";
  for (const auto& k : registry()) {
    out += "  " + k.path() + " = " + k.get(defaults) + "\n      " + k.doc;
    out += "\n";
  }
  return out;
}

}  // namespace fastwbc::config
