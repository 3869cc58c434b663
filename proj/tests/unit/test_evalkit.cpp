#include "fastwbc/error.hpp"
#include "fastwbc/evalkit/eval.hpp"
#include "fastwbc/motion/curation.hpp"

#include "fixtures.hpp"
#include "metric_oracle.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

using namespace fastwbc;
using namespace fastwbc::evalkit;

namespace {

motion::MotionLibrary upright_library() {
  motion::MotionClip c;
  c.name = "stand";
  c.frames.resize(120);
  const env::PtbModel m;
  c = motion::estimate_contacts(motion::extract_com_cop(motion::fk_fill(c, m), m), 0.01);
  motion::MotionLibrary lib;
  lib.clips.push_back(c);
  return lib;
}

config::RunConfig no_dr_config() {
  config::RunConfig cfg = testkit::small_run_config();
  cfg.eval.domain_rand = false;
  return cfg;
}

MetricsReport hand_report(double succ, const std::string& mode = "train", std::uint64_t seed = 1) {
  MetricsReport r;
  r.mode = mode;
  r.seed = seed;
  r.episodes_per_clip = 10;
  r.clips.push_back({"a", {}});
  r.aggregate.succ.mean = succ;
  r.aggregate.mpd.mean = 0.05;
  return r;
}

}  // namespace

TEST(Metrics, IdenticalStreamsAreZero) {
  const auto t = testkit::scripted_trajectory(1);
  std::vector<RobotFrame> same;
  for (const auto& f : t.ref) {
    RobotFrame r;
    r.q = f.joints;
    r.keypoints = {f.keypoints.ankle, f.keypoints.hip, f.keypoints.head};
    r.root_vel = f.lin_vel;
    r.contact = {1, 0};
    same.push_back(r);
  }
  EXPECT_EQ(e_mpjpe(same, t.ref), 0.0);
  EXPECT_EQ(e_mpkpe(same, t.ref), 0.0);
  EXPECT_EQ(e_vel(same, t.ref), 0.0);
  EXPECT_EQ(slip(same, t.ref), 0.0);
  EXPECT_EQ(e_mpd(same, t.ref), 0.0);
}

TEST(Metrics, HandExamples) {
  std::vector<motion::MotionFrame> ref(10);
  std::vector<RobotFrame> robot(10);
  for (auto& r : robot) {
    r.q = env::Vec2(0.1, 0.0);
    r.com_x = 0.3;
    r.cop_x = 0.18;
  }
  EXPECT_NEAR(e_mpjpe(robot, ref), 0.05, 1e-15);
  EXPECT_NEAR(e_mpjpe(robot, ref, true), std::sqrt(0.005), 1e-15);
  EXPECT_NEAR(e_mpd(robot, ref), 0.12, 1e-15);
  robot.pop_back();
  EXPECT_THROW(e_mpjpe(robot, ref), ValidationError);
  EXPECT_THROW(e_mpd(robot, ref), ValidationError);
}

TEST(Metrics, MatchBruteForceOracle) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto t = testkit::scripted_trajectory(seed);
    const auto o = testkit::oracle_metrics(t.robot, t.ref);
    EXPECT_NEAR(e_mpjpe(t.robot, t.ref), o.mpjpe, 1e-12);
    EXPECT_NEAR(e_mpkpe(t.robot, t.ref), o.mpkpe, 1e-12);
    EXPECT_NEAR(e_vel(t.robot, t.ref), o.vel, 1e-12);
    EXPECT_NEAR(slip(t.robot, t.ref), o.slip, 1e-12);
    EXPECT_NEAR(e_mpd(t.robot, t.ref), o.mpd, 1e-12);
  }
}

TEST(Metrics, StatIsPopulationMoments) {
  const Stat s = stat_of({1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_DOUBLE_EQ(s.std, std::sqrt(1.25));
  EXPECT_EQ(stat_of({}).mean, 0.0);
}

TEST(Report, AssemblyExcludesUntrackedEpisodesFromErrors) {
  std::vector<EpisodeResult> eps(3);
  eps[0] = {0, true, env::Termination::None, 100, 0.1, 0.2, 0.3, 0.0, 0.01};
  eps[1] = {0, false, env::Termination::Tipped, 0, 0, 0, 0, 0, 0};
  eps[2] = {1, false, env::Termination::Fall, 40, 0.3, 0.4, 0.5, 0.1, 0.03};
  const MetricsReport r = assemble_report(eps, {"a", "b"});
  ASSERT_EQ(r.clips.size(), 2u);
  EXPECT_DOUBLE_EQ(r.clips[0].metrics.succ.mean, 50.0);
  EXPECT_DOUBLE_EQ(r.clips[0].metrics.mpjpe.mean, 0.1);
  EXPECT_DOUBLE_EQ(r.clips[0].metrics.mean_tracked_frames, 50.0);
  EXPECT_EQ(r.aggregate.episodes, 3);
  EXPECT_EQ(r.aggregate.successes, 1);
  EXPECT_NEAR(r.aggregate.succ.mean, 100.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(r.aggregate.mpjpe.mean, 0.2);
  EXPECT_EQ(r.aggregate.terminations[static_cast<std::size_t>(env::Termination::Tipped)], 1);
  EXPECT_EQ(r.aggregate.terminations[static_cast<std::size_t>(env::Termination::Fall)], 1);
}

TEST(Report, JsonRoundTripIsByteIdentical) {
  std::vector<EpisodeResult> eps(2);
  eps[0] = {0, true, env::Termination::None, 100, 0.1 / 3, 0.2, 0.3, 0.0, 0.01};
  eps[1] = {1, false, env::Termination::Fall, 40, 0.3, 0.4, 0.5, 0.1, 0.03};
  MetricsReport r = assemble_report(eps, {"a", "b"});
  r.mode = "eval_2m";
  r.seed = 99;
  r.episodes_per_clip = 1;
  r.checkpoint_id = "0123456789abcdef";
  const std::string text = report_to_json(r).dump();
  EXPECT_EQ(report_to_json(report_from_json(nlohmann::json::parse(text))).dump(), text);
  EXPECT_NE(text.find("\"terminations\""), std::string::npos);
  EXPECT_NE(text.find("\"eval_2m\""), std::string::npos);
  auto bad = report_to_json(r);
  bad["aggregate"].erase("succ");
  EXPECT_THROW(report_from_json(bad), ValidationError);
}

TEST(Report, CsvHasClipRowsAndAggregate) {
  std::vector<EpisodeResult> eps(1);
  eps[0] = {1, true, env::Termination::None, 10, 0, 0, 0, 0, 0};
  const MetricsReport r = assemble_report(eps, {"a", "b", "c"});
  std::istringstream in(report_to_csv(r));
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  ASSERT_EQ(lines.size(), 5u);
  EXPECT_EQ(lines[0].rfind("clip,mode,", 0), 0u);
  EXPECT_EQ(lines[4].rfind("aggregate,", 0), 0u);

  const auto dir = testkit::scratch_dir("report");
  EXPECT_THROW(emit_report(r, "xml", dir / "r.xml"), ValidationError);
  EXPECT_THROW(emit_report(r, "json", dir / "missing" / "r.json"), ValidationError);
  emit_report(r, "csv", dir / "r.csv");
  EXPECT_TRUE(std::filesystem::exists(dir / "r.csv"));
}

TEST(Ablation, DirectionsAndMetadata) {
  const auto same = ablation_compare(hand_report(90), hand_report(90), {{Metric::Succ, true}, {Metric::Mpd, false}});
  for (const auto& d : same) EXPECT_FALSE(d.pass);
  const auto win = ablation_compare(hand_report(97.56), hand_report(84.15), {{Metric::Succ, true}});
  EXPECT_TRUE(win[0].pass);
  EXPECT_THROW(ablation_compare(hand_report(90, "train"), hand_report(80, "eval_2m"), {}), ValidationError);
  EXPECT_THROW(ablation_compare(hand_report(90, "train", 1), hand_report(80, "train", 2), {}), ValidationError);

  const std::vector<MetricsReport> a{hand_report(90), hand_report(60), hand_report(90)};
  const std::vector<MetricsReport> b{hand_report(80), hand_report(85), hand_report(70)};
  const auto multi = ablation_compare(a, b, {{Metric::Succ, true}});
  EXPECT_NEAR(multi[0].a, 80.0, 1e-12);
  EXPECT_NEAR(multi[0].b, 235.0 / 3.0, 1e-12);
  EXPECT_TRUE(multi[0].pass);
  EXPECT_THROW(ablation_compare(std::vector<MetricsReport>(a.begin(), a.begin() + 2),
                                std::vector<MetricsReport>(b.begin(), b.begin() + 2), {}),
               ValidationError);
}

TEST(Eval, ZeroActionPolicyHoldsStaticClip) {
  const auto lib = upright_library();
  const auto agent = testkit::small_agent(1, false, 0.0);
  const MetricsReport r = run_eval(agent, lib, no_dr_config(), env::EvalMode::Train, 2, 5);
  EXPECT_EQ(r.aggregate.succ.mean, 100.0);
  EXPECT_LT(r.aggregate.mpjpe.mean, 1e-9);
  EXPECT_EQ(r.aggregate.mean_tracked_frames, 119.0);
}

TEST(Eval, WildPolicyFailsDynamicClips) {
  const auto lib = testkit::source_library();
  const auto agent = testkit::small_agent(2, false, 30.0);
  const MetricsReport r = run_eval(agent, lib, testkit::small_run_config(), env::EvalMode::Train, 1, 5);
  EXPECT_EQ(r.aggregate.succ.mean, 0.0);
  EXPECT_LT(r.aggregate.mean_tracked_frames, 50.0);
}

TEST(Eval, DeterministicAndValidated) {
  const auto lib = testkit::source_library();
  const auto agent = testkit::small_agent(3, false);
  const auto cfg = testkit::small_run_config();
  const auto a = report_to_json(run_eval(agent, lib, cfg, env::EvalMode::Eval2m, 1, 9, "id")).dump();
  const auto b = report_to_json(run_eval(agent, lib, cfg, env::EvalMode::Eval2m, 1, 9, "id")).dump();
  EXPECT_EQ(a, b);
  EXPECT_THROW(run_eval(agent, motion::MotionLibrary{}, cfg, env::EvalMode::Train, 1, 9), ValidationError);
  EXPECT_THROW(run_eval(agent, lib, cfg, env::EvalMode::Train, 0, 9), ValidationError);
}

TEST(Replay, RowsAndCsv) {
  const auto lib = upright_library();
  const auto agent = testkit::small_agent(1, false, 0.0);
  const auto rows = replay(agent, lib.clips[0], no_dr_config(), env::EvalMode::Train, 1);
  ASSERT_EQ(rows.size(), 119u);
  EXPECT_EQ(rows.back().termination, "none");
  EXPECT_NEAR(rows[0].reward, 7.0, 1e-9);
  const auto dir = testkit::scratch_dir("replay");
  write_trajectory_csv(rows, dir / "t.csv");
  std::ifstream in(dir / "t.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_NE(header.find("w_track"), std::string::npos);
  EXPECT_NE(header.find("r_balance"), std::string::npos);
}

TEST(Verify, RequiresResidualAndHoldsForZeroResidual) {
  const auto lib = upright_library();
  const auto cfg = no_dr_config();
  EXPECT_THROW(verify_propositions(testkit::small_agent(1, false), lib, cfg, 50, 50, 1), ValidationError);
  const auto zero = testkit::small_agent(1, true, 0.0);
  const PropositionReport r = verify_propositions(zero, lib, cfg, 100, 200, 1);
  EXPECT_EQ(r.max_residual_norm, 0.0);
  EXPECT_EQ(r.max_violation, 0.0);
  EXPECT_TRUE(r.kl_bound_holds);
  EXPECT_TRUE(r.lipschitz_holds);
  const PropositionReport live = verify_propositions(testkit::small_agent(2, true, 1.0), testkit::source_library(),
                                                     testkit::small_run_config(), 500, 500, 2);
  EXPECT_EQ(live.n_states, 500u);
  EXPECT_GT(live.max_residual_norm, 0.0);
  EXPECT_LE(live.max_violation, 1e-9);
  EXPECT_LE(live.max_isotropic_gap, 1e-9);
  EXPECT_LE(live.empirical_lipschitz, live.lipschitz_bound);
}
