#include "fastwbc/trainer/checkpoint.hpp"

#include "fastwbc/env/state.hpp"
#include "fastwbc/error.hpp"
#include "fastwbc/trainer/serialize.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace fastwbc::trainer {

using nlohmann::json;

namespace {

json dims(const std::vector<std::size_t>& v) {
  json a = json::array();
  for (auto d : v) a.push_back(d);
  return a;
}

std::vector<std::size_t> read_dims(const io::Reader& r, const json& j) {
  std::vector<std::size_t> out;
  const auto& a = r.array(j);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const long d = r.at(i).integer(a[i]);
    if (d <= 0) r.at(i).fail("must be positive");
    out.push_back(static_cast<std::size_t>(d));
  }
  return out;
}

std::vector<std::size_t> hidden_of(const numcore::MlpNet& net) {
  std::vector<std::size_t> h;
  for (std::size_t l = 0; l + 1 < net.num_layers(); ++l) {
    h.push_back(static_cast<std::size_t>(net.weights[l].rows()));
  }
  return h;
}

}  // namespace

json checkpoint_to_json(const Checkpoint& c) {
  const Agent& a = c.agent;
  json j;
  j["schema_version"] = kCheckpointSchemaVersion;
  j["stage"] = stage_name(c.stage());
  j["arch"] = {{"obs_dim", a.actor.input_dim()},
               {"critic_obs_dim", a.critic.input_dim()},
               {"act_dim", a.actor.output_dim()},
               {"experts", a.actor.experts.size()},
               {"hidden", dims(hidden_of(a.actor.experts.front()))},
               {"obs_layout_version", env::kObsLayoutVersion}};
  json residual = nullptr;
  if (a.residual) {
    residual = {{"net", io::to_json(a.residual->net)}, {"parseval_scale", a.residual->parseval_scale}};
  }
  const json actor = io::to_json(a.actor);
  j["params"] = {{"experts", actor["experts"]},
                 {"gating", actor["gating"]},
                 {"critic", io::to_json(a.critic)},
                 {"residual", residual},
                 {"log_std", io::to_json(a.head.log_std)}};
  j["norm_stats"] = {{"enabled", a.obs_norm},
                     {"actor", io::to_json(a.actor_norm)},
                     {"critic", io::to_json(a.critic_norm)}};
  if (c.runtime) {
    const RuntimeState& rt = *c.runtime;
    json envs = json::array();
    for (const auto& s : rt.envs) {
      envs.push_back({{"env", io::to_json(s.env)},
                      {"action_rng", s.action_rng},
                      {"clip", s.clip},
                      {"segment", s.segment}});
    }
    j["sampler_state"] = io::to_json(rt.sampler);
    j["rng_state"] = {{"envs", envs}, {"sampler", rt.sampler_rng}, {"shuffle", rt.shuffle_rng}};
    j["optimizer"] = {{"adam", io::to_json(rt.adam)}, {"lr", rt.lr}};
  } else {
    j["sampler_state"] = nullptr;
    j["rng_state"] = nullptr;
    j["optimizer"] = nullptr;
  }
  j["iteration"] = c.iteration;
  j["seed"] = c.seed;
  j["config"] = config::to_json(c.config);
  return j;
}

Checkpoint checkpoint_from_json(const json& j) {
  const io::Reader r;
  if (!j.is_object()) r.fail("checkpoint must be a JSON object");
  const long version = r.at("schema_version").integer(r.field(j, "schema_version"));
  if (version != kCheckpointSchemaVersion) {
    r.at("schema_version").fail("unsupported version " + std::to_string(version) + ", expected " +
                                std::to_string(kCheckpointSchemaVersion));
  }
  Checkpoint c;
  const Stage stage = [&] {
    try {
      return parse_stage(r.at("stage").string(r.field(j, "stage")));
    } catch (const ValidationError& e) {
      r.at("stage").fail(e.what());
    }
  }();

  const auto ra = r.at("arch");
  const json& arch = r.field(j, "arch");
  const long layout = ra.at("obs_layout_version").integer(ra.field(arch, "obs_layout_version"));
  if (layout != env::kObsLayoutVersion) {
    ra.at("obs_layout_version").fail("observation layout " + std::to_string(layout) +
                                     " does not match this build (" +
                                     std::to_string(env::kObsLayoutVersion) + ")");
  }
  const auto obs_dim = static_cast<std::size_t>(ra.at("obs_dim").integer(ra.field(arch, "obs_dim")));
  const auto critic_dim =
      static_cast<std::size_t>(ra.at("critic_obs_dim").integer(ra.field(arch, "critic_obs_dim")));
  const auto act_dim = static_cast<std::size_t>(ra.at("act_dim").integer(ra.field(arch, "act_dim")));
  const auto experts = static_cast<std::size_t>(ra.at("experts").integer(ra.field(arch, "experts")));
  const auto hidden = read_dims(ra.at("hidden"), ra.field(arch, "hidden"));
  if (obs_dim != env::kActorObsDim || critic_dim != env::kCriticObsDim || act_dim != 2) {
    ra.fail("dimensions do not match the balancer observation/action spaces");
  }

  const auto rp = r.at("params");
  const json& params = r.field(j, "params");
  Agent& a = c.agent;
  a.actor = rp.moe({{"experts", rp.field(params, "experts")}, {"gating", rp.field(params, "gating")}});
  a.critic = rp.at("critic").moe(rp.field(params, "critic"));
  a.head.log_std = rp.at("log_std").vector(rp.field(params, "log_std"));
  const json& res = rp.field(params, "residual");
  if (!res.is_null()) {
    const auto rr = rp.at("residual");
    policy::ResidualPolicy p;
    p.net = rr.at("net").mlp(rr.field(res, "net"));
    p.parseval_scale = rr.at("parseval_scale").number(rr.field(res, "parseval_scale"));
    if (p.net.input_dim() != obs_dim || p.net.output_dim() != act_dim) rr.fail("shape mismatch");
    a.residual = std::move(p);
  }
  if (a.actor.experts.size() != experts || a.actor.input_dim() != obs_dim ||
      a.actor.output_dim() != act_dim || hidden_of(a.actor.experts.front()) != hidden) {
    rp.fail("actor does not match the architecture descriptor");
  }
  if (a.critic.input_dim() != critic_dim || a.critic.output_dim() != 1) {
    rp.at("critic").fail("shape mismatch");
  }
  if (static_cast<std::size_t>(a.head.log_std.size()) != act_dim) rp.at("log_std").fail("length mismatch");
  if ((a.residual.has_value()) != (stage == Stage::ResidualAdapt)) {
    r.at("stage").fail("stage tag does not match presence of a residual network");
  }

  const auto rn = r.at("norm_stats");
  const json& norm = r.field(j, "norm_stats");
  a.obs_norm = rn.at("enabled").boolean(rn.field(norm, "enabled"));
  a.actor_norm = rn.at("actor").norm(rn.field(norm, "actor"));
  a.critic_norm = rn.at("critic").norm(rn.field(norm, "critic"));
  if (a.actor_norm.dim() != obs_dim) rn.at("actor").fail("dimension mismatch");
  if (a.critic_norm.dim() != critic_dim) rn.at("critic").fail("dimension mismatch");

  const json& sampler = r.field(j, "sampler_state");
  if (!sampler.is_null()) {
    RuntimeState rt;
    rt.sampler = r.at("sampler_state").sampler(sampler);
    const auto rr = r.at("rng_state");
    const json& rng = r.field(j, "rng_state");
    rt.sampler_rng = rr.at("sampler").u64(rr.field(rng, "sampler"));
    rt.shuffle_rng = rr.at("shuffle").u64(rr.field(rng, "shuffle"));
    const auto re = rr.at("envs");
    const json& envs = re.array(rr.field(rng, "envs"));
    for (std::size_t i = 0; i < envs.size(); ++i) {
      const auto ri = re.at(i);
      EnvSlotState s;
      s.env = ri.at("env").env_snapshot(ri.field(envs[i], "env"));
      s.action_rng = ri.at("action_rng").u64(ri.field(envs[i], "action_rng"));
      s.clip = static_cast<std::size_t>(ri.at("clip").integer(ri.field(envs[i], "clip")));
      s.segment = static_cast<std::size_t>(ri.at("segment").integer(ri.field(envs[i], "segment")));
      rt.envs.push_back(std::move(s));
    }
    const auto ro = r.at("optimizer");
    const json& opt = r.field(j, "optimizer");
    ro.at("adam").adam(ro.field(opt, "adam"), rt.adam);
    rt.lr = ro.at("lr").number(ro.field(opt, "lr"));
    c.runtime = std::move(rt);
  }
  c.iteration = static_cast<int>(r.at("iteration").integer(r.field(j, "iteration")));
  c.seed = r.at("seed").u64(r.field(j, "seed"));
  try {
    c.config = config::from_json(r.field(j, "config"));
  } catch (const ValidationError& e) {
    r.at("config").fail(e.what());
  }
  return c;
}

void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open '" + path.string() + "' for writing");
  out << checkpoint_to_json(c).dump() << '\n';
  if (!out) throw ValidationError("failed writing '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open checkpoint '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError("checkpoint '" + path.string() + "' is not valid JSON: " + e.what());
  }
  try {
    return checkpoint_from_json(j);
  } catch (const ValidationError& e) {
    throw ValidationError("checkpoint '" + path.string() + "': " + e.what());
  }
}

std::string checkpoint_id(const Checkpoint& c) {
  const std::string text = checkpoint_to_json(c).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace fastwbc::trainer
