// Acceptance run: one PASS/FAIL line per criterion, artifacts in --workdir.

#include "fixtures.hpp"
#include "metric_oracle.hpp"

#include "fastwbc/env/env.hpp"
#include "fastwbc/error.hpp"
#include "fastwbc/evalkit/eval.hpp"
#include "fastwbc/evalkit/metrics.hpp"
#include "fastwbc/motion/curation.hpp"
#include "fastwbc/motion/generators.hpp"
#include "fastwbc/policy/regularizers.hpp"
#include "fastwbc/reward/reward.hpp"
#include "fastwbc/trainer/checkpoint.hpp"
#include "fastwbc/trainer/train.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace fastwbc;
using numcore::Matrix;
using numcore::Prng;
using numcore::Vector;
using trainer::Agent;
using trainer::Checkpoint;
using trainer::Stage;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
  double seconds = 0;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double mean_of(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

std::string join(const std::vector<double>& v, const char* f = "%.2f") {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "/" : "") + fmt(f, v[i]);
  return out;
}

Matrix randn(Eigen::Index r, Eigen::Index c, Prng& rng, double scale = 1.0) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * rng.normal();
  return m;
}

std::size_t pick(Prng& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng.uniform(0.0, 1.0) * static_cast<double>(hi - lo + 1)) %
                  (hi - lo + 1);
}

motion::MotionLibrary library(motion::Preset p) {
  motion::MotionLibrary lib;
  lib.clips = motion::make_preset(p, 1);
  return lib;
}

// Shared state so later criteria reuse trained checkpoints.
struct Context {
  fs::path workdir;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  int eval_episodes = 10;
  std::map<std::uint64_t, Checkpoint> bases;
  std::map<std::uint64_t, Checkpoint> fast;
};

config::RunConfig base_config() {
  config::RunConfig cfg;
  cfg.ppo.stop_succ = 100.0;
  cfg.eval.snapshot_interval = 25;
  cfg.eval.snapshot_episodes = 4;
  return cfg;
}

evalkit::MetricSet evaluate(const Agent& agent, const motion::MotionLibrary& lib,
                            const config::RunConfig& cfg, const Context& ctx, std::uint64_t seed,
                            const fs::path& out) {
  const auto report = evalkit::run_eval(agent, lib, cfg, env::EvalMode::Train, ctx.eval_episodes,
                                        seed + 1000);
  evalkit::emit_report(report, "json", out);
  return report.aggregate;
}

Checkpoint ensure_base(Context& ctx, std::uint64_t seed, double* seconds = nullptr) {
  if (auto it = ctx.bases.find(seed); it != ctx.bases.end()) return it->second;
  const auto t0 = std::chrono::steady_clock::now();
  std::ofstream log(ctx.workdir / fmt("base_s%llu.log.jsonl", static_cast<unsigned long long>(seed)));
  const auto res = trainer::train_base(library(motion::Preset::Source), base_config(), seed, &log);
  trainer::save_checkpoint(res.checkpoint,
                           ctx.workdir / fmt("base_s%llu.json", static_cast<unsigned long long>(seed)));
  if (seconds) *seconds = elapsed(t0);
  ctx.bases.emplace(seed, res.checkpoint);
  return res.checkpoint;
}

// Agent with a randomized small architecture; the residual weights are
// perturbed off their Parseval initialization.
Agent random_agent(Prng& rng, bool residual) {
  config::ArchConfig arch;
  arch.hidden = {pick(rng, 4, 12), pick(rng, 4, 12)};
  arch.experts = pick(rng, 1, 3);
  arch.residual_hidden = {pick(rng, 4, 12), pick(rng, 4, 12)};
  arch.init_log_std = rng.uniform(-1.0, 0.3);
  arch.final_gain = rng.uniform(0.2, 1.0);
  Agent a = Agent::create(arch, env::kActorObsDim, env::kCriticObsDim, 2, rng);
  a.head.log_std(1) = rng.uniform(-1.0, 0.3);
  if (residual) {
    a.add_residual(arch, rng.uniform(0.1, 1.0), rng.uniform(0.5, 3.0), rng);
    for (auto& w : a.residual->net.weights) w += randn(w.rows(), w.cols(), rng, 0.2);
  }
  return a;
}

// ---------------------------------------------------------------------------

Outcome gradient_exactness(Context&) {
  const char* names[] = {"surrogate", "value", "entropy", "parseval", "kl", "total"};
  std::array<double, 6> worst{};
  double layer_worst = 0;
  double least_corrupted = HUGE_VAL;
  for (int i = 0; i < 100; ++i) {
    Prng rng(1000 + static_cast<std::uint64_t>(i));
    const int kind = i % 6;
    const bool adapt = kind == 3 || kind == 4 || (kind != 3 && kind != 4 && (i / 6) % 2 == 1);
    const Agent agent = random_agent(rng, adapt);
    config::PpoConfig cfg;
    cfg.value_coeff = 0;
    cfg.entropy_coeff = 0;
    cfg.lambda_p = 0;
    cfg.lambda_k = 0;
    cfg.clip = rng.uniform(0.1, 0.3);
    bool zero_adv = true;
    switch (kind) {
      case 0: zero_adv = false; break;
      case 1: cfg.value_coeff = rng.uniform(0.5, 2.0); break;
      case 2: cfg.entropy_coeff = rng.uniform(1e-3, 1e-1); break;
      case 3: cfg.lambda_p = rng.uniform(1e-3, 1.0); break;
      case 4: cfg.lambda_k = rng.uniform(1e-2, 2.0); break;
      default:
        zero_adv = false;
        cfg.value_coeff = rng.uniform(0.5, 2.0);
        cfg.entropy_coeff = rng.uniform(1e-3, 1e-1);
        if (adapt) {
          cfg.lambda_p = rng.uniform(1e-3, 1.0);
          cfg.lambda_k = rng.uniform(1e-2, 2.0);
        }
    }
    const trainer::Batch batch =
        testkit::random_batch(agent, pick(rng, 4, 16), rng, zero_adv, rng.uniform(0.05, 0.5));
    const auto check = testkit::ppo_grad_check(agent, batch, cfg, adapt ? Stage::ResidualAdapt : Stage::Base);
    const double err = check.error;
    worst[static_cast<std::size_t>(kind)] = std::max(worst[static_cast<std::size_t>(kind)], err);
    // A 1e-4 relative corruption of the analytic gradient must be caught.
    const double corrupted = check.corrupted_error;
    least_corrupted = std::min(least_corrupted, corrupted);

    if (kind == 3) {
      const auto r = static_cast<Eigen::Index>(pick(rng, 2, 12));
      const auto c = static_cast<Eigen::Index>(pick(rng, 2, 12));
      const Matrix w = randn(r, c, rng, rng.uniform(0.3, 1.2));
      const double s = rng.uniform(0.5, 3.0);
      const numcore::ScalarFn f = [&](const Vector& t) {
        return policy::layer_parseval_loss(Eigen::Map<const Matrix>(t.data(), r, c), s);
      };
      const Matrix g = policy::layer_parseval_grad(w, s);
      layer_worst = std::max(
          layer_worst, numcore::grad_check(f, Eigen::Map<const Vector>(g.data(), g.size()),
                                           Eigen::Map<const Vector>(w.data(), w.size()), 1e-5));
    }
  }
  double all = layer_worst;
  std::string detail = "max rel err";
  for (std::size_t k = 0; k < 6; ++k) {
    all = std::max(all, worst[k]);
    detail += fmt(" %s %.1e", names[k], worst[k]);
  }
  detail += fmt(" parseval-layer %.1e (limit 1e-5, 100 configs); 1e-4 corruption detected at >= %.1e",
                layer_worst, least_corrupted);
  return {all < 1e-5 && least_corrupted > 1e-5, detail};
}

Outcome lipschitz_bound(Context&) {
  Prng rng(2000);
  double worst_ratio = 0;
  int violations = 0;
  auto check = [&](const policy::ResidualPolicy& res) {
    Prng pr = Prng(rng.next_u64());
    const double est = policy::empirical_lipschitz(res.net, 10000, rng.uniform(0.5, 3.0), pr);
    const double bound = policy::lipschitz_bound(res);
    worst_ratio = std::max(worst_ratio, est / bound);
    if (est > bound) ++violations;
  };
  auto random_residual = [&] {
    std::vector<std::size_t> hidden;
    const std::size_t depth = pick(rng, 1, 3);
    for (std::size_t d = 0; d < depth; ++d) hidden.push_back(pick(rng, 4, 32));
    auto res = policy::ResidualPolicy::create(pick(rng, 3, 27), 2, hidden, rng, rng.uniform(0.1, 2.0));
    for (auto& w : res.net.weights) w += randn(w.rows(), w.cols(), rng, rng.uniform(0.0, 0.5));
    for (auto& b : res.net.biases) b = randn(b.size(), 1, rng, 0.1);
    return res;
  };
  auto parseval_steps = [](policy::ResidualPolicy& res, int steps, double lr) {
    numcore::Adam adam;
    std::vector<Matrix> grads(res.net.num_layers());
    numcore::ParamList params, gviews;
    for (std::size_t l = 0; l < res.net.num_layers(); ++l) {
      grads[l] = Matrix::Zero(res.net.weights[l].rows(), res.net.weights[l].cols());
      numcore::append_views(res.net.weights[l], params);
      numcore::append_views(grads[l], gviews);
    }
    for (int k = 0; k < steps; ++k) {
      const auto g = policy::parseval_grad(res);
      for (std::size_t l = 0; l < g.size(); ++l) grads[l] = g[l];
      adam.step(params, gviews, lr);
    }
  };
  for (int k = 0; k < 50; ++k) check(random_residual());
  for (int k = 0; k < 50; ++k) {
    auto res = random_residual();
    parseval_steps(res, static_cast<int>(pick(rng, 50, 500)), 1e-2);
    check(res);
  }

  // Parseval loss alone from a Gaussian init of the default residual shape.
  double worst_defect = 0;
  const double s = policy::kDefaultParsevalScale;
  for (int trial = 0; trial < 5; ++trial) {
    auto res = policy::ResidualPolicy::create(env::kActorObsDim, 2, {64, 64, 32}, rng, 0.01, s);
    for (auto& w : res.net.weights) w = randn(w.rows(), w.cols(), rng, 1.0 / std::sqrt(static_cast<double>(w.cols())));
    parseval_steps(res, 2000, 1e-3);
    double defect = 0;
    const std::size_t hidden_layers = res.net.num_layers() - 1;
    for (std::size_t l = 0; l < hidden_layers; ++l) defect += policy::layer_parseval_defect(res.net.weights[l], s);
    worst_defect = std::max(worst_defect, defect / static_cast<double>(hidden_layers));
  }
  const bool pass = violations == 0 && worst_defect < 0.05 * s;
  return {pass, fmt("bound violations %d/100 (max estimate/bound %.3f); mean layer defect after "
                    "2000 Parseval steps %.2e (limit %.2f, worst of 5 inits)",
                    violations, worst_ratio, worst_defect, 0.05 * s)};
}

// Quick adaptation used when the adaptation criterion has not run.
Checkpoint quick_adapted(Context& ctx) {
  if (auto it = ctx.fast.find(ctx.seeds.front()); it != ctx.fast.end()) return it->second;
  auto cfg = testkit::small_run_config();
  cfg.adapt.residual_final_gain = 0.5;
  const auto lib = library(motion::Preset::Source);
  const Checkpoint base = trainer::train_base(lib, cfg, 9).checkpoint;
  return trainer::adapt_residual(base, library(motion::Preset::Target), cfg, 9).checkpoint;
}

Outcome kl_bound(Context& ctx) {
  const Checkpoint ckpt = quick_adapted(ctx);
  const Agent& agent = ckpt.agent;
  if (!agent.residual) return {false, "checkpoint has no residual"};
  const auto lib = library(motion::Preset::Target);
  config::RunConfig cfg = ckpt.config;
  env::BalancerEnv env(cfg.env, 77);
  Prng rng(78);

  policy::GaussianHead iso = agent.head;
  iso.log_std = Vector::Constant(iso.log_std.size(), agent.head.log_std.mean());

  double max_violation = -1e300, max_gap = 0, max_norm = 0;
  int states = 0;
  while (states < 10000) {
    const auto& clip = lib.clips[pick(rng, 0, lib.clips.size() - 1)];
    env.reset(clip, pick(rng, 0, clip.size() - 2));
    for (;;) {
      const Matrix obs = agent.normalize_actor(Matrix(env.actor_obs()));
      const Vector base = agent.base_mean(obs).col(0);
      const Vector r = agent.residual_mean(obs).col(0);
      const double sq = r.squaredNorm();
      max_norm = std::max(max_norm, std::sqrt(sq));
      const double kl = policy::kl_shared_cov(base + r, base, agent.head);
      max_violation = std::max(max_violation, sq - 2.0 * kl * agent.head.max_variance());
      const double kl_iso = policy::kl_shared_cov(base + r, base, iso);
      max_gap = std::max(max_gap, std::abs(sq - 2.0 * kl_iso * iso.max_variance()));
      if (++states >= 10000) break;
      const auto [action, logp] = policy::sample_and_logprob(base + r, agent.head, rng);
      (void)logp;
      if (env.step(action).done) break;
    }
  }
  const bool pass = max_violation <= 1e-9 && max_gap <= 1e-9;
  return {pass, fmt("%d states, max ||mu_r||^2 - 2 KL lambda_max = %.2e, isotropic gap %.2e "
                    "(limit 1e-9), max ||mu_r|| %.3f",
                    states, max_violation, max_gap, max_norm)};
}

Outcome reward_suite(Context&) {
  using namespace reward;
  std::vector<std::string> failed;
  auto near = [&](double got, double want, const char* what, double tol = 1e-9) {
    if (!(std::abs(got - want) <= tol)) failed.push_back(fmt("%s got %.12g want %.12g", what, got, want));
  };
  const env::PtbModel m;
  auto ref_at = [&](const env::Vec2& q) {
    motion::MotionFrame f;
    f.joints = q;
    f.keypoints = env::forward_kinematics(m, q);
    f.root_pos = f.keypoints.hip;
    f.root_ang = q(0) + q(1);
    return f;
  };
  const RewardWeights w;

  near(gauss_score(0.0, 0.16), 1.0, "gauss(0)");
  near(gauss_score(0.16, 0.16), std::exp(-1.0), "gauss(sigma)");

  env::EnvState s;
  s.q = env::Vec2(0.1, -0.3);
  RewardTerms exact = tracking_terms(m, s, ref_at(s.q), w);
  for (std::size_t i = 0; i < 7; ++i) near(exact.raw[i], 1.0, term_name(term_at(i)).c_str());
  s = {};
  s.q = env::Vec2(0.4, 0.0);
  near(tracking_terms(m, s, ref_at(env::Vec2::Zero()), w).get(Term::JointPos), std::exp(-0.5), "joint_pos 0.4");
  s = {};
  s.qd = env::Vec2(3.14, -3.14);
  near(tracking_terms(m, s, ref_at(env::Vec2::Zero()), w).get(Term::BodyAngVel), std::exp(-1.0 / 3.0),
       "body_ang_vel");

  near(contact_reward({1, 0}, {1, 0}), 1.0, "contact match");
  near(contact_reward({1, 0}, {0, 1}), 0.0, "contact swap");
  near(contact_reward({1, 1}, {1, 0}), 0.5, "contact half");

  near(balance_penalty({0.12, 0.5}, 0.0, w), 0.0, "balance inside");
  near(balance_penalty({0.12 + 0.0064, 0.5}, 0.0, w), -2.0 * (1.0 - std::exp(-1.0)), "balance 0.0064");
  near(balance_penalty({0.12 + 0.0064, 0.5}, 0.0, w), -1.2642, "balance rounded", 1e-4);

  const AdaptiveWeightCfg a;
  near(adaptive_weight(0.0, a), 1.0, "w_track 0");
  near(adaptive_weight(a.tau, a), 1.0, "w_track tau");
  near(adaptive_weight(a.tau + a.kappa, a), std::exp(-1.0), "w_track tau+kappa");
  near(adaptive_weight(HUGE_VAL, a), a.w_min, "w_track inf");
  near(adaptive_weight(motion::ref_com_cop_distance(motion::gen_lean_hold(0.05, 1.0).frames.back(), m.foot_half), a),
       1.0, "w_track benign lean");

  RewardTerms t;
  for (std::size_t i = 0; i < 7; ++i) t.set(term_at(i), 1.0);
  add_aux_terms(t, AuxSignals{}, {1, 0}, {1, 0}, 0.0, 0.0, w, RewardFlags{});
  near(total_reward(t, 1.0, w), 7.0, "total perfect");
  near(total_reward(t, a.w_min, w), 4.75, "total w_min");

  AuxSignals aux;
  aux.joint_limit_violation = joint_limit_violation(m, env::Vec2(1.3, 0.0));
  near(aux.joint_limit_violation, 0.1, "joint limit excess", 1e-12);
  RewardTerms lim = t;
  add_aux_terms(lim, aux, {1, 0}, {1, 0}, 0.0, 0.0, w, RewardFlags{});
  near(total_reward(lim, 1.0, w), 6.0, "total joint limit");

  AuxSignals pen;
  pen.action = env::Vec2(1.0, 0.0);
  pen.terminated = true;
  pen.ground_collisions = 2;
  RewardTerms p = t;
  add_aux_terms(p, pen, {1, 0}, {1, 0}, 0.0, 0.0, w, RewardFlags{});
  near(total_reward(p, 1.0, w), 7.0 - 0.1 - 0.2 - 1.0, "total penalties");

  const auto full = weighted_terms(t, 1.0, w);
  const auto half = weighted_terms(t, 0.5, w);
  std::vector<std::string> scaled;
  for (std::size_t i = 0; i < kNumTerms; ++i) {
    if (full[i] != half[i]) scaled.push_back(term_name(term_at(i)));
  }
  const std::vector<std::string> expected{"joint_pos", "body_pos", "anchor_pos"};
  if (scaled != expected) failed.push_back("down-weighted terms differ from joint_pos, body_pos, anchor_pos");

  std::string detail = failed.empty() ? "all reward and w_track examples exact; down-weighted: joint_pos body_pos anchor_pos"
                                      : failed.front();
  if (failed.size() > 1) detail += fmt(" (+%zu more)", failed.size() - 1);
  return {failed.empty(), detail};
}

double peak_vel(const motion::MotionClip& c, int j) {
  double m = 0;
  for (const auto& f : c.frames) m = std::max(m, std::abs(f.joint_vel(j)));
  return m;
}

Outcome curation_exactness(Context&) {
  std::vector<std::string> failed;
  const env::PtbModel model;

  // Height: lift a squat, adjust, check the quantile condition and idempotence.
  double worst_q = 0;
  bool idempotent = true;
  for (double lift : {0.3, -0.05, 0.0}) {
    motion::MotionClip c = motion::gen_squat(0.4, 0.5, 4.0);
    for (auto& f : c.frames) {
      for (auto* k : {&f.keypoints.ankle, &f.keypoints.hip, &f.keypoints.head, &f.keypoints.heel, &f.keypoints.toe}) {
        (*k)(1) += lift;
      }
      f.root_pos(1) += lift;
    }
    for (double clearance : {0.0, 0.02}) {
      const auto a = motion::adjust_height(c, clearance);
      std::vector<double> mins;
      for (const auto& f : a.frames) mins.push_back(std::min(f.keypoints.heel(1), f.keypoints.toe(1)));
      worst_q = std::max(worst_q, std::abs(motion::quantile(mins, motion::kHeightQuantile) - clearance));
      const auto b = motion::adjust_height(a, clearance);
      for (std::size_t i = 0; i < a.size(); ++i) {
        if ((b.frames[i].keypoints.ankle - a.frames[i].keypoints.ankle).norm() > 1e-9) idempotent = false;
      }
    }
  }
  if (worst_q > 1e-9) failed.push_back(fmt("height quantile off by %.2e", worst_q));
  if (!idempotent) failed.push_back("adjust_height not idempotent");

  // Speed: a 500-frame clip at factor 2 against the same motion generated at
  // twice the frequency; both sides differentiated at the clip rate.
  double worst_speed = 0, worst_double = 0;
  bool halved = true;
  for (auto [amp, freq] : {std::pair{0.1, 0.25}, std::pair{0.15, 0.5}, std::pair{0.2, 0.5}}) {
    const auto c = motion::gen_sway(amp, freq, 10.0, 0.0, model);
    const auto fast = motion::augment_speed(c, 2.0, model);
    const auto oracle = motion::gen_sway(amp, 2.0 * freq, 5.0, 0.0, model);
    halved = halved && c.size() == 500 && fast.size() == 250;
    for (int j = 0; j < 2; ++j) {
      worst_speed = std::max(worst_speed, std::abs(peak_vel(fast, j) - peak_vel(oracle, j)));
      worst_double = std::max(worst_double, std::abs(peak_vel(fast, j) - 2.0 * peak_vel(c, j)));
    }
  }
  if (!halved) failed.push_back("augment_speed(2) did not halve 500 frames");
  if (worst_speed > 1e-3) failed.push_back(fmt("peak velocity off the oracle by %.2e", worst_speed));

  // Joint perturbation: exact -1/2 compensation, velocities unchanged.
  bool perturb_exact = true;
  const auto sq = motion::gen_squat(0.3, 0.5, 2.0);
  for (double delta : {0.2, -0.13}) {
    const auto p = motion::augment_joint_perturb(sq, 1, delta, {0}, model);
    for (std::size_t i = 0; i < sq.size(); ++i) {
      perturb_exact = perturb_exact && p.frames[i].joints(1) == sq.frames[i].joints(1) + delta &&
                      p.frames[i].joints(0) == sq.frames[i].joints(0) - 0.5 * delta &&
                      (p.frames[i].joint_vel - sq.frames[i].joint_vel).norm() <= 1e-9;
    }
  }
  if (!perturb_exact) failed.push_back("joint perturbation compensation not exact");

  std::string detail = fmt("quantile err %.1e, idempotent; speed x2: 500->250 frames, peak vel vs "
                           "doubled-frequency oracle %.1e (limit 1e-3), vs 2x original %.1e; "
                           "perturb -1/2 compensation exact",
                           worst_q, worst_speed, worst_double);
  if (!failed.empty()) detail = failed.front();
  return {failed.empty(), detail};
}

Outcome metric_oracle(Context&) {
  double worst = 0;
  std::vector<evalkit::EpisodeResult> episodes;
  int successes = 0;
  std::vector<double> mpjpe;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto t = testkit::scripted_trajectory(seed);
    const auto o = testkit::oracle_metrics(t.robot, t.ref);
    for (auto [got, want] : {std::pair{evalkit::e_mpjpe(t.robot, t.ref), o.mpjpe},
                             std::pair{evalkit::e_mpkpe(t.robot, t.ref), o.mpkpe},
                             std::pair{evalkit::e_vel(t.robot, t.ref), o.vel},
                             std::pair{evalkit::slip(t.robot, t.ref), o.slip},
                             std::pair{evalkit::e_mpd(t.robot, t.ref), o.mpd}}) {
      worst = std::max(worst, std::abs(got - want));
    }
    // Succ: every third trajectory is scored as a fall.
    const bool ok = seed % 3 != 0;
    successes += ok ? 1 : 0;
    mpjpe.push_back(o.mpjpe);
    episodes.push_back(evalkit::score_episode(0, t.robot, t.ref, ok,
                                              ok ? env::Termination::None : env::Termination::Fall, false));
  }
  const auto report = evalkit::assemble_report(episodes, {"scripted"});
  worst = std::max(worst, std::abs(report.aggregate.succ.mean - 100.0 * successes / 20.0));
  worst = std::max(worst, std::abs(report.aggregate.mpjpe.mean - mean_of(mpjpe)));
  return {worst <= 1e-12,
          fmt("20 scripted trajectories, Succ and five error metrics, max |diff| %.1e (limit 1e-12)", worst)};
}

Outcome determinism(Context& ctx) {
  config::RunConfig cfg;
  cfg.ppo.iterations = 10;
  cfg.eval.snapshot_interval = 0;
  const auto lib = library(motion::Preset::Source);
  const auto a = trainer::train_base(lib, cfg, 5).checkpoint;
  const auto b = trainer::train_base(lib, cfg, 5).checkpoint;
  const std::string ja = trainer::checkpoint_to_json(a).dump();
  const std::string jb = trainer::checkpoint_to_json(b).dump();
  trainer::save_checkpoint(a, ctx.workdir / "determinism_a.json");
  trainer::save_checkpoint(b, ctx.workdir / "determinism_b.json");
  const bool files_same = [&] {
    auto slurp = [](const fs::path& p) {
      std::ifstream in(p, std::ios::binary);
      return std::string(std::istreambuf_iterator<char>(in), {});
    };
    return slurp(ctx.workdir / "determinism_a.json") == slurp(ctx.workdir / "determinism_b.json");
  }();
  const auto ra = evalkit::run_eval(a.agent, lib, cfg, env::EvalMode::Train, 2, 11, trainer::checkpoint_id(a));
  const auto rb = evalkit::run_eval(b.agent, lib, cfg, env::EvalMode::Train, 2, 11, trainer::checkpoint_id(b));
  const bool reports_same = evalkit::report_to_json(ra).dump() == evalkit::report_to_json(rb).dump() &&
                            evalkit::report_to_csv(ra) == evalkit::report_to_csv(rb);
  const bool pass = ja == jb && files_same && reports_same && a.iteration == 10;
  return {pass, fmt("checkpoints %s (id %s), files %s, reports %s",
                    ja == jb ? "bit-identical" : "DIFFER", trainer::checkpoint_id(a).c_str(),
                    files_same ? "byte-identical" : "DIFFER", reports_same ? "byte-identical" : "DIFFER")};
}

Outcome base_training(Context& ctx) {
  std::vector<double> succ, minutes, iters;
  const auto lib = library(motion::Preset::Source);
  const auto cfg = base_config();
  for (auto seed : ctx.seeds) {
    double seconds = 0;
    const Checkpoint ck = ensure_base(ctx, seed, &seconds);
    const auto m = evaluate(ck.agent, lib, cfg, ctx, seed,
                            ctx.workdir / fmt("eval_base_s%llu_src.json", static_cast<unsigned long long>(seed)));
    succ.push_back(m.succ.mean);
    minutes.push_back(seconds / 60.0);
    iters.push_back(ck.iteration);
  }
  const double avg = mean_of(succ);
  const bool fast_enough = *std::max_element(minutes.begin(), minutes.end()) < 30.0;
  return {avg >= 90.0 && fast_enough,
          fmt("source Succ %s%% (mean %.2f, need >= 90) after %s iterations, %s min per seed",
              join(succ).c_str(), avg, join(iters, "%.0f").c_str(), join(minutes, "%.1f").c_str())};
}

Outcome adaptation_ordering(Context& ctx) {
  const auto src = library(motion::Preset::Source);
  const auto tgt = library(motion::Preset::Target);
  const auto cfg = base_config();
  std::vector<double> base_t, fast_t, noreg_t, fast_s, noreg_s, fast_e, noreg_e;
  for (auto seed : ctx.seeds) {
    const auto s = static_cast<unsigned long long>(seed);
    const Checkpoint base = ensure_base(ctx, seed);
    std::ofstream flog(ctx.workdir / fmt("fast_s%llu.log.jsonl", s));
    const Checkpoint fast = trainer::adapt_residual(base, tgt, cfg, seed, &flog).checkpoint;
    auto nocfg = cfg;
    nocfg.ppo.lambda_p = 0.0;
    nocfg.ppo.lambda_k = 0.0;
    std::ofstream nlog(ctx.workdir / fmt("noreg_s%llu.log.jsonl", s));
    const Checkpoint noreg = trainer::adapt_residual(base, tgt, nocfg, seed, &nlog).checkpoint;
    trainer::save_checkpoint(fast, ctx.workdir / fmt("fast_s%llu.json", s));
    trainer::save_checkpoint(noreg, ctx.workdir / fmt("noreg_s%llu.json", s));
    ctx.fast.emplace(seed, fast);

    const auto path = [&](const char* arm, const char* set) {
      return ctx.workdir / fmt("eval_%s_s%llu_%s.json", arm, s, set);
    };
    base_t.push_back(evaluate(base.agent, tgt, cfg, ctx, seed, path("base", "tgt")).succ.mean);
    const auto ft = evaluate(fast.agent, tgt, cfg, ctx, seed, path("fast", "tgt"));
    const auto nt = evaluate(noreg.agent, tgt, cfg, ctx, seed, path("noreg", "tgt"));
    const auto fs_ = evaluate(fast.agent, src, cfg, ctx, seed, path("fast", "src"));
    const auto ns = evaluate(noreg.agent, src, cfg, ctx, seed, path("noreg", "src"));
    fast_t.push_back(ft.succ.mean);
    noreg_t.push_back(nt.succ.mean);
    fast_s.push_back(fs_.succ.mean);
    noreg_s.push_back(ns.succ.mean);
    fast_e.push_back(fs_.mpjpe.mean);
    noreg_e.push_back(ns.mpjpe.mean);
  }
  const double bt = mean_of(base_t), ft = mean_of(fast_t), nt = mean_of(noreg_t);
  const double fs_ = mean_of(fast_s), ns = mean_of(noreg_s), fe = mean_of(fast_e), ne = mean_of(noreg_e);
  const bool c1 = ft > bt, c2 = ft >= nt, c3 = fs_ > ns, c4 = fe <= ne;
  return {c1 && c2 && c3 && c4,
          fmt("target Succ FAST %.2f vs base %.2f [%s], vs noreg %.2f [%s]; source Succ FAST %.2f vs "
              "noreg %.2f [%s]; source E_mpjpe FAST %.4f vs noreg %.4f [%s] (per seed FAST tgt %s, "
              "noreg tgt %s, FAST src %s, noreg src %s)",
              ft, bt, c1 ? "ok" : "X", nt, c2 ? "ok" : "X", fs_, ns, c3 ? "ok" : "X", fe, ne, c4 ? "ok" : "X",
              join(fast_t).c_str(), join(noreg_t).c_str(), join(fast_s).c_str(), join(noreg_s).c_str())};
}

Outcome com_ablation(Context& ctx) {
  const auto agg = library(motion::Preset::Aggressive);
  std::vector<double> on_s, off_s, on_d, off_d;
  for (auto seed : ctx.seeds) {
    const auto s = static_cast<unsigned long long>(seed);
    for (bool on : {true, false}) {
      auto cfg = base_config();
      cfg.ppo.iterations = 150;
      cfg.ppo.stop_succ = 0.0;
      cfg.env.flags.use_balance = on;
      cfg.env.flags.use_w_track = on;
      const char* arm = on ? "com" : "nocom";
      std::ofstream log(ctx.workdir / fmt("%s_s%llu.log.jsonl", arm, s));
      const Checkpoint ck = trainer::train_base(agg, cfg, seed, &log).checkpoint;
      trainer::save_checkpoint(ck, ctx.workdir / fmt("%s_s%llu.json", arm, s));
      const auto m = evaluate(ck.agent, agg, base_config(), ctx, seed,
                              ctx.workdir / fmt("eval_%s_s%llu_agg.json", arm, s));
      (on ? on_s : off_s).push_back(m.succ.mean);
      (on ? on_d : off_d).push_back(m.mpd.mean);
    }
  }
  const double a = mean_of(on_s), b = mean_of(off_s), c = mean_of(on_d), d = mean_of(off_d);
  return {a > b && c < d,
          fmt("aggressive Succ balance+w_track %.2f vs disabled %.2f [%s]; E_mpd %.4f vs %.4f [%s] "
              "(per seed Succ %s vs %s)",
              a, b, a > b ? "ok" : "X", c, d, c < d ? "ok" : "X", join(on_s).c_str(), join(off_s).c_str())};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fastwbc acceptance run"};
  std::string workdir = "acceptance_work";
  std::vector<int> only;
  app.add_option("--workdir", workdir, "directory for checkpoints, logs and reports");
  app.add_option("--only", only, "run only these criteria (1-10)")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  Context ctx;
  ctx.workdir = workdir;
  fs::create_directories(ctx.workdir);

  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome(Context&)> run;
  };
  // Training criteria run last; the KL check reuses an adapted checkpoint.
  const std::vector<Criterion> plan{
      {1, "gradient exactness", gradient_exactness},
      {2, "Lipschitz bound and Parseval defect", lipschitz_bound},
      {4, "reward and w_track suite", reward_suite},
      {8, "curation exactness", curation_exactness},
      {9, "metric oracle equivalence", metric_oracle},
      {10, "determinism", determinism},
      {5, "base training", base_training},
      {6, "adaptation ordering", adaptation_ordering},
      {3, "KL residual bound", kl_bound},
      {7, "CoM ablation ordering", com_ablation},
  };

  std::map<int, std::pair<std::string, Outcome>> results;
  for (const auto& c : plan) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run(ctx);
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    o.seconds = elapsed(t0);
    std::cout << "[" << c.id << "] " << (o.pass ? "PASS" : "FAIL") << " " << c.name << " (" << fmt("%.1f", o.seconds)
              << " s): " << o.detail << std::endl;
    results[c.id] = {c.name, o};
  }

  nlohmann::json summary = nlohmann::json::array();
  bool all = true;
  std::cout << "\nacceptance summary\n";
  for (const auto& [id, r] : results) {
    const auto& [name, o] = r;
    all = all && o.pass;
    std::cout << fmt("criterion %2d  %s  %-36s %8.1f s  ", id, o.pass ? "PASS" : "FAIL", name.c_str(), o.seconds)
              << o.detail << "\n";
    summary.push_back({{"criterion", id}, {"name", name}, {"pass", o.pass}, {"seconds", o.seconds}, {"detail", o.detail}});
  }
  std::ofstream(ctx.workdir / "summary.json") << summary.dump(2) << "\n";
  return all ? 0 : 1;
}
