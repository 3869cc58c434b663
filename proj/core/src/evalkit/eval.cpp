#include "fastwbc/evalkit/eval.hpp"

#include "fastwbc/env/env.hpp"
#include "fastwbc/error.hpp"
#include "fastwbc/policy/regularizers.hpp"
#include "fastwbc/trainer/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>

namespace fastwbc::evalkit {

using trainer::Matrix;
using trainer::Vector;

namespace {

env::EnvConfig eval_env_config(const config::RunConfig& cfg, env::EvalMode mode) {
  env::EnvConfig e = cfg.env;
  e.mode = mode;
  if (!cfg.eval.domain_rand) {
    e.dr.joint_offset = false;
    e.dr.com_offset = false;
    e.dr.push = false;
  }
  return e;
}

std::uint64_t episode_seed(std::uint64_t seed, std::size_t clip, std::size_t episode) {
  numcore::Prng mix(numcore::Prng::sub_seed(seed, numcore::tags::kEval) + (clip << 20) + episode);
  return mix.next_u64();
}

Matrix stack_obs(const std::vector<const env::BalancerEnv*>& envs) {
  Matrix obs(static_cast<Eigen::Index>(env::kActorObsDim), static_cast<Eigen::Index>(envs.size()));
  for (std::size_t k = 0; k < envs.size(); ++k) obs.col(static_cast<Eigen::Index>(k)) = envs[k]->actor_obs();
  return obs;
}

}  // namespace

MetricsReport run_eval(const trainer::Agent& agent, const motion::MotionLibrary& lib,
                       const config::RunConfig& cfg, env::EvalMode mode, int episodes_per_clip,
                       std::uint64_t seed, const std::string& checkpoint_id) {
  if (lib.clips.empty()) throw ValidationError("run_eval: empty motion library");
  if (episodes_per_clip <= 0) throw ValidationError("run_eval: episodes_per_clip must be positive");
  const env::EnvConfig ecfg = eval_env_config(cfg, mode);

  struct Episode {
    std::unique_ptr<env::BalancerEnv> env;
    std::size_t clip;
    std::vector<RobotFrame> robot;
    std::vector<motion::MotionFrame> ref;
    bool done = false;
    bool success = false;
    env::Termination term = env::Termination::None;
  };
  std::vector<Episode> eps;
  for (std::size_t c = 0; c < lib.clips.size(); ++c) {
    for (int e = 0; e < episodes_per_clip; ++e) {
      Episode ep;
      ep.env = std::make_unique<env::BalancerEnv>(ecfg, episode_seed(seed, c, static_cast<std::size_t>(e)));
      ep.env->reset(lib.clips[c], 0);
      ep.clip = c;
      eps.push_back(std::move(ep));
    }
  }

  std::vector<std::size_t> active(eps.size());
  for (std::size_t i = 0; i < eps.size(); ++i) active[i] = i;
  while (!active.empty()) {
    std::vector<const env::BalancerEnv*> envs;
    for (std::size_t i : active) envs.push_back(eps[i].env.get());
    const Matrix mean = agent.mean(agent.normalize_actor(stack_obs(envs)));
    std::vector<std::size_t> still;
    for (std::size_t k = 0; k < active.size(); ++k) {
      Episode& ep = eps[active[k]];
      const env::StepResult r = ep.env->step(mean.col(static_cast<Eigen::Index>(k)));
      if (r.termination == env::Termination::None) {
        ep.robot.push_back(robot_frame(ep.env->model(), ep.env->state()));
        ep.ref.push_back(ep.env->clip().frames[ep.env->state().frame_idx]);
      }
      if (r.done) {
        ep.done = true;
        ep.success = r.success;
        ep.term = r.termination;
      } else {
        still.push_back(active[k]);
      }
    }
    active = std::move(still);
  }

  std::vector<EpisodeResult> results;
  for (const auto& ep : eps) {
    results.push_back(score_episode(ep.clip, ep.robot, ep.ref, ep.success, ep.term, cfg.eval.rmse));
  }
  std::vector<std::string> names;
  for (const auto& c : lib.clips) names.push_back(c.name);
  MetricsReport report = assemble_report(results, names);
  report.checkpoint_id = checkpoint_id;
  report.mode = env::eval_mode_name(mode);
  report.seed = seed;
  report.episodes_per_clip = episodes_per_clip;
  report.domain_rand = cfg.eval.domain_rand;
  return report;
}

std::vector<TrajectoryRow> replay(const trainer::Agent& agent, const motion::MotionClip& clip,
                                  const config::RunConfig& cfg, env::EvalMode mode,
                                  std::uint64_t seed) {
  env::BalancerEnv e(eval_env_config(cfg, mode), episode_seed(seed, 0, 0));
  e.reset(clip, 0);
  std::vector<TrajectoryRow> rows;
  while (true) {
    const Matrix obs = e.actor_obs();
    const Matrix mean = agent.mean(agent.normalize_actor(obs));
    const env::StepResult r = e.step(mean.col(0));
    const env::EnvState& s = e.state();
    const motion::MotionFrame& ref = clip.frames[s.frame_idx];
    const RobotFrame f = robot_frame(e.model(), s);
    TrajectoryRow row;
    row.t = s.t;
    row.q = s.q;
    row.q_ref = ref.joints;
    row.keypoints = f.keypoints;
    row.keypoints_ref = {ref.keypoints.ankle, ref.keypoints.hip, ref.keypoints.head};
    row.com = env::compute_com(e.model(), s);
    row.com_ref = ref.com;
    row.cop_x = f.cop_x;
    row.cop_ref = ref.cop_x;
    row.w_track = r.w_track;
    row.reward = r.reward;
    row.terms = reward::weighted_terms(r.terms, r.w_track, cfg.env.weights);
    row.termination = env::termination_name(r.termination);
    rows.push_back(row);
    if (r.done) break;
  }
  return rows;
}

void write_trajectory_csv(const std::vector<TrajectoryRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open '" + path.string() + "' for writing");
  out << "time,q1,q2,q1_ref,q2_ref,ankle_x,ankle_z,hip_x,hip_z,head_x,head_z,"
         "ankle_ref_x,ankle_ref_z,hip_ref_x,hip_ref_z,head_ref_x,head_ref_z,"
         "com_x,com_z,com_ref_x,com_ref_z,cop_x,cop_ref_x,w_track,reward";
  for (std::size_t i = 0; i < reward::kNumTerms; ++i) out << ",r_" << reward::term_name(reward::term_at(i));
  out << ",termination\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << ',' << buf;
  };
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g", r.t);
    out << buf;
    num(r.q(0)); num(r.q(1)); num(r.q_ref(0)); num(r.q_ref(1));
    for (const auto& k : r.keypoints) { num(k(0)); num(k(1)); }
    for (const auto& k : r.keypoints_ref) { num(k(0)); num(k(1)); }
    num(r.com(0)); num(r.com(1)); num(r.com_ref(0)); num(r.com_ref(1));
    num(r.cop_x); num(r.cop_ref); num(r.w_track); num(r.reward);
    for (double v : r.terms) num(v);
    out << ',' << r.termination << '\n';
  }
  if (!out) throw ValidationError("failed writing '" + path.string() + "'");
}

namespace {

const std::array<Metric, 6> kMetrics = {Metric::Succ, Metric::Mpjpe, Metric::Mpkpe,
                                        Metric::Vel,  Metric::Slip,  Metric::Mpd};

const Stat& stat(const MetricSet& m, Metric which) {
  switch (which) {
    case Metric::Succ: return m.succ;
    case Metric::Mpjpe: return m.mpjpe;
    case Metric::Mpkpe: return m.mpkpe;
    case Metric::Vel: return m.vel;
    case Metric::Slip: return m.slip;
    case Metric::Mpd: return m.mpd;
  }
  return m.succ;
}

Stat& stat(MetricSet& m, Metric which) {
  return const_cast<Stat&>(stat(static_cast<const MetricSet&>(m), which));
}

nlohmann::ordered_json set_to_json(const MetricSet& m) {
  nlohmann::ordered_json j;
  for (Metric x : kMetrics) j[metric_name(x)] = {{"mean", stat(m, x).mean}, {"std", stat(m, x).std}};
  j["episodes"] = m.episodes;
  j["successes"] = m.successes;
  j["mean_tracked_frames"] = m.mean_tracked_frames;
  nlohmann::ordered_json hist;
  for (int k = 0; k < env::kNumTerminationKinds; ++k) {
    hist[env::termination_name(static_cast<env::Termination>(k))] = m.terminations[static_cast<std::size_t>(k)];
  }
  j["terminations"] = hist;
  return j;
}

MetricSet set_from_json(const nlohmann::json& j, const trainer::io::Reader& r) {
  MetricSet m;
  for (Metric x : kMetrics) {
    const auto rn = r.at(metric_name(x));
    const auto& s = r.field(j, metric_name(x));
    stat(m, x).mean = rn.at("mean").number(rn.field(s, "mean"));
    stat(m, x).std = rn.at("std").number(rn.field(s, "std"));
  }
  m.episodes = static_cast<int>(r.at("episodes").integer(r.field(j, "episodes")));
  m.successes = static_cast<int>(r.at("successes").integer(r.field(j, "successes")));
  m.mean_tracked_frames = r.at("mean_tracked_frames").number(r.field(j, "mean_tracked_frames"));
  const auto rh = r.at("terminations");
  const auto& hist = r.field(j, "terminations");
  for (int k = 0; k < env::kNumTerminationKinds; ++k) {
    const std::string name = env::termination_name(static_cast<env::Termination>(k));
    m.terminations[static_cast<std::size_t>(k)] = static_cast<int>(rh.at(name).integer(rh.field(hist, name)));
  }
  return m;
}

}  // namespace

std::string metric_name(Metric m) {
  switch (m) {
    case Metric::Succ: return "succ";
    case Metric::Mpjpe: return "e_mpjpe";
    case Metric::Mpkpe: return "e_mpkpe";
    case Metric::Vel: return "e_vel";
    case Metric::Slip: return "slip";
    case Metric::Mpd: return "e_mpd";
  }
  return "succ";
}

double metric_mean(const MetricSet& m, Metric which) { return stat(m, which).mean; }

nlohmann::json report_to_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["checkpoint_id"] = r.checkpoint_id;
  j["mode"] = r.mode;
  j["seed"] = r.seed;
  j["episodes_per_clip"] = r.episodes_per_clip;
  j["domain_rand"] = r.domain_rand;
  nlohmann::ordered_json clips = nlohmann::ordered_json::array();
  for (const auto& c : r.clips) {
    nlohmann::ordered_json cj;
    cj["name"] = c.name;
    cj["metrics"] = set_to_json(c.metrics);
    clips.push_back(cj);
  }
  j["clips"] = clips;
  j["aggregate"] = set_to_json(r.aggregate);
  return nlohmann::json::parse(j.dump());
}

MetricsReport report_from_json(const nlohmann::json& j) {
  const trainer::io::Reader r;
  MetricsReport rep;
  rep.checkpoint_id = r.at("checkpoint_id").string(r.field(j, "checkpoint_id"));
  rep.mode = r.at("mode").string(r.field(j, "mode"));
  rep.seed = r.at("seed").u64(r.field(j, "seed"));
  rep.episodes_per_clip = static_cast<int>(r.at("episodes_per_clip").integer(r.field(j, "episodes_per_clip")));
  rep.domain_rand = r.at("domain_rand").boolean(r.field(j, "domain_rand"));
  const auto rc = r.at("clips");
  const auto& clips = rc.array(r.field(j, "clips"));
  for (std::size_t i = 0; i < clips.size(); ++i) {
    const auto ri = rc.at(i);
    ClipReport c;
    c.name = ri.at("name").string(ri.field(clips[i], "name"));
    c.metrics = set_from_json(ri.field(clips[i], "metrics"), ri.at("metrics"));
    rep.clips.push_back(std::move(c));
  }
  rep.aggregate = set_from_json(r.field(j, "aggregate"), r.at("aggregate"));
  return rep;
}

std::string report_to_csv(const MetricsReport& r) {
  std::string out = "clip,mode,episodes,successes,mean_tracked_frames";
  for (Metric m : kMetrics) out += "," + metric_name(m) + "_mean," + metric_name(m) + "_std";
  for (int k = 0; k < env::kNumTerminationKinds; ++k) {
    out += ",term_" + env::termination_name(static_cast<env::Termination>(k));
  }
  out += "\n";
  char buf[64];
  auto row = [&](const std::string& name, const MetricSet& s) {
    out += name + "," + r.mode + "," + std::to_string(s.episodes) + "," + std::to_string(s.successes);
    std::snprintf(buf, sizeof buf, ",%.17g", s.mean_tracked_frames);
    out += buf;
    for (Metric m : kMetrics) {
      std::snprintf(buf, sizeof buf, ",%.17g,%.17g", stat(s, m).mean, stat(s, m).std);
      out += buf;
    }
    for (int t : s.terminations) out += "," + std::to_string(t);
    out += "\n";
  };
  for (const auto& c : r.clips) row(c.name, c.metrics);
  row("aggregate", r.aggregate);
  return out;
}

void emit_report(const MetricsReport& r, const std::string& format, const std::filesystem::path& path,
                 const nlohmann::json& config) {
  std::string text;
  if (format == "json") {
    nlohmann::json j = report_to_json(r);
    if (!config.is_null()) j["config"] = config;
    text = j.dump(2) + "\n";
  } else if (format == "csv") {
    text = report_to_csv(r);
  } else {
    throw ValidationError("emit_report: format must be json or csv");
  }
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw ValidationError("failed writing '" + path.string() + "'");
}

namespace {

void require_comparable(const MetricsReport& a, const MetricsReport& b) {
  bool same = a.mode == b.mode && a.seed == b.seed && a.episodes_per_clip == b.episodes_per_clip &&
              a.clips.size() == b.clips.size();
  for (std::size_t i = 0; same && i < a.clips.size(); ++i) same = a.clips[i].name == b.clips[i].name;
  if (!same) throw ValidationError("ablation_compare: reports differ in mode, seed, episodes or clips");
}

}  // namespace

std::vector<DirectionResult> ablation_compare(const MetricsReport& a, const MetricsReport& b,
                                              const std::vector<Direction>& dirs) {
  require_comparable(a, b);
  std::vector<DirectionResult> out;
  for (const auto& d : dirs) {
    const double va = metric_mean(a.aggregate, d.metric), vb = metric_mean(b.aggregate, d.metric);
    out.push_back({d.metric, d.a_greater, va, vb, d.a_greater ? va > vb : va < vb});
  }
  return out;
}

std::vector<DirectionResult> ablation_compare(const std::vector<MetricsReport>& a,
                                              const std::vector<MetricsReport>& b,
                                              const std::vector<Direction>& dirs) {
  if (a.size() != b.size() || a.size() < 3) {
    throw ValidationError("ablation_compare: need >= 3 paired seeds");
  }
  for (std::size_t i = 0; i < a.size(); ++i) require_comparable(a[i], b[i]);
  std::vector<DirectionResult> out;
  for (const auto& d : dirs) {
    double va = 0, vb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      va += metric_mean(a[i].aggregate, d.metric);
      vb += metric_mean(b[i].aggregate, d.metric);
    }
    va /= static_cast<double>(a.size());
    vb /= static_cast<double>(b.size());
    out.push_back({d.metric, d.a_greater, va, vb, d.a_greater ? va > vb : va < vb});
  }
  return out;
}

Matrix collect_states(const trainer::Agent& agent, const motion::MotionLibrary& lib,
                      const config::RunConfig& cfg, std::size_t n_states, std::uint64_t seed) {
  if (lib.clips.empty()) throw ValidationError("collect_states: empty motion library");
  const env::EnvConfig ecfg = eval_env_config(cfg, env::EvalMode::Train);
  Matrix states(static_cast<Eigen::Index>(env::kActorObsDim), static_cast<Eigen::Index>(n_states));
  std::size_t filled = 0;
  for (std::size_t episode = 0; filled < n_states; ++episode) {
    const std::size_t c = episode % lib.clips.size();
    env::BalancerEnv e(ecfg, episode_seed(seed, c, episode));
    e.reset(lib.clips[c], 0);
    while (filled < n_states) {
      const Matrix obs = agent.normalize_actor(e.actor_obs());
      states.col(static_cast<Eigen::Index>(filled++)) = obs.col(0);
      const env::StepResult r = e.step(agent.mean(obs).col(0));
      if (r.done) break;
    }
  }
  return states;
}

PropositionReport verify_propositions(const trainer::Agent& agent, const motion::MotionLibrary& lib,
                                      const config::RunConfig& cfg, std::size_t n_states,
                                      int n_pairs, std::uint64_t seed) {
  if (!agent.residual) throw ValidationError("verify_propositions: checkpoint has no residual policy");
  PropositionReport rep;
  const policy::ResidualPolicy& res = *agent.residual;

  rep.lipschitz_bound = policy::lipschitz_bound(res);
  numcore::Prng rng(numcore::Prng::sub_seed(seed, numcore::tags::kEval));
  rep.empirical_lipschitz = policy::empirical_lipschitz(res.net, n_pairs, 10.0, rng);
  rep.lipschitz_holds = rep.empirical_lipschitz <= rep.lipschitz_bound;

  const Matrix states = collect_states(agent, lib, cfg, n_states, seed);
  const Matrix mu_b = agent.base_mean(states);
  const Matrix mu_r = agent.residual_mean(states);
  policy::GaussianHead iso;
  iso.log_std = Vector::Constant(agent.head.log_std.size(), agent.head.log_std.mean());
  const double lam = agent.head.max_variance();
  rep.n_states = n_states;
  for (Eigen::Index i = 0; i < states.cols(); ++i) {
    const Vector mb = mu_b.col(i);
    const Vector mr = mu_r.col(i);
    const Vector mu = mb + mr;
    const double norm_sq = mr.squaredNorm();
    const double kl = policy::kl_shared_cov(mu, mb, agent.head);
    rep.max_violation = std::max(rep.max_violation, norm_sq - 2.0 * kl * lam);
    const double kl_iso = policy::kl_shared_cov(mu, mb, iso);
    rep.max_isotropic_gap =
        std::max(rep.max_isotropic_gap, std::abs(norm_sq - 2.0 * kl_iso * iso.max_variance()));
    rep.max_residual_norm = std::max(rep.max_residual_norm, std::sqrt(norm_sq));
  }
  rep.max_violation = std::max(rep.max_violation, 0.0);
  rep.kl_bound_holds = rep.max_violation <= 1e-9 && rep.max_isotropic_gap <= 1e-9;
  return rep;
}

nlohmann::json propositions_to_json(const PropositionReport& r) {
  return {{"lipschitz",
           {{"lipschitz_bound", r.lipschitz_bound},
            {"empirical_lipschitz", r.empirical_lipschitz},
            {"margin", r.lipschitz_bound - r.empirical_lipschitz},
            {"holds", r.lipschitz_holds}}},
          {"kl_bound",
           {{"n_states", r.n_states},
            {"max_violation", r.max_violation},
            {"max_isotropic_gap", r.max_isotropic_gap},
            {"max_residual_norm", r.max_residual_norm},
            {"holds", r.kl_bound_holds}}}};
}

}  // namespace fastwbc::evalkit
