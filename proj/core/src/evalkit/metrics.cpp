#include "fastwbc/evalkit/metrics.hpp"

#include "fastwbc/error.hpp"

#include <cmath>

namespace fastwbc::evalkit {

namespace {

void require_aligned(const std::vector<RobotFrame>& robot,
                     const std::vector<motion::MotionFrame>& ref, const char* op) {
  if (robot.size() != ref.size()) {
    throw ValidationError(std::string(op) + ": stream lengths differ (" +
                          std::to_string(robot.size()) + " vs " + std::to_string(ref.size()) + ")");
  }
}

template <typename F>
double mean_over(std::size_t n, F f) {
  if (n == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += f(i);
  return sum / static_cast<double>(n);
}

}  // namespace

RobotFrame robot_frame(const env::PtbModel& model, const env::EnvState& state) {
  const env::BodyState b = env::body_state(model, state);
  RobotFrame f;
  f.q = state.q;
  f.keypoints = {b.pos.ankle, b.pos.hip, b.pos.head};
  f.root_vel = b.vel.hip;
  f.foot_xd = state.foot_xd;
  f.contact = env::robot_contacts(state);
  f.com_x = b.com(0);
  f.cop_x = state.foot_x + state.cop_x;
  return f;
}

double e_mpjpe(const std::vector<RobotFrame>& robot, const std::vector<motion::MotionFrame>& ref,
               bool rmse) {
  require_aligned(robot, ref, "e_mpjpe");
  if (rmse) {
    return std::sqrt(mean_over(robot.size(), [&](std::size_t i) {
      return (robot[i].q - ref[i].joints).squaredNorm() / 2.0;
    }));
  }
  return mean_over(robot.size(), [&](std::size_t i) {
    return (robot[i].q - ref[i].joints).cwiseAbs().sum() / 2.0;
  });
}

double e_mpkpe(const std::vector<RobotFrame>& robot, const std::vector<motion::MotionFrame>& ref) {
  require_aligned(robot, ref, "e_mpkpe");
  return mean_over(robot.size(), [&](std::size_t i) {
    const auto& k = ref[i].keypoints;
    return ((robot[i].keypoints[0] - k.ankle).norm() + (robot[i].keypoints[1] - k.hip).norm() +
            (robot[i].keypoints[2] - k.head).norm()) /
           3.0;
  });
}

double e_vel(const std::vector<RobotFrame>& robot, const std::vector<motion::MotionFrame>& ref) {
  require_aligned(robot, ref, "e_vel");
  return mean_over(robot.size(),
                   [&](std::size_t i) { return (robot[i].root_vel - ref[i].lin_vel).norm(); });
}

double slip(const std::vector<RobotFrame>& robot, const std::vector<motion::MotionFrame>& ref) {
  require_aligned(robot, ref, "slip");
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& f : robot) {
    if (f.contact[0] + f.contact[1] > 0) {
      sum += std::abs(f.foot_xd);
      ++n;
    }
  }
  return n ? sum / static_cast<double>(n) : 0.0;
}

double e_mpd(const std::vector<RobotFrame>& robot, const std::vector<motion::MotionFrame>& ref) {
  require_aligned(robot, ref, "e_mpd");
  return mean_over(robot.size(), [&](std::size_t i) { return std::abs(robot[i].com_x - robot[i].cop_x); });
}

Stat stat_of(const std::vector<double>& values) {
  Stat s;
  if (values.empty()) return s;
  const double n = static_cast<double>(values.size());
  for (double v : values) s.mean += v;
  s.mean /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / n);
  return s;
}

EpisodeResult score_episode(std::size_t clip, const std::vector<RobotFrame>& robot,
                            const std::vector<motion::MotionFrame>& ref, bool success,
                            env::Termination termination, bool rmse) {
  EpisodeResult r;
  r.clip = clip;
  r.success = success;
  r.termination = termination;
  r.tracked_frames = robot.size();
  r.mpjpe = e_mpjpe(robot, ref, rmse);
  r.mpkpe = e_mpkpe(robot, ref);
  r.vel = e_vel(robot, ref);
  r.slip = slip(robot, ref);
  r.mpd = e_mpd(robot, ref);
  return r;
}

namespace {

MetricSet summarize(const std::vector<const EpisodeResult*>& eps) {
  MetricSet m;
  std::vector<double> succ, mpjpe, mpkpe, vel, sl, mpd;
  double frames = 0.0;
  for (const EpisodeResult* e : eps) {
    succ.push_back(e->success ? 100.0 : 0.0);
    m.successes += e->success ? 1 : 0;
    ++m.terminations[static_cast<std::size_t>(e->termination)];
    frames += static_cast<double>(e->tracked_frames);
    if (e->tracked_frames == 0) continue;
    mpjpe.push_back(e->mpjpe);
    mpkpe.push_back(e->mpkpe);
    vel.push_back(e->vel);
    sl.push_back(e->slip);
    mpd.push_back(e->mpd);
  }
  m.episodes = static_cast<int>(eps.size());
  m.mean_tracked_frames = eps.empty() ? 0.0 : frames / static_cast<double>(eps.size());
  m.succ = stat_of(succ);
  m.mpjpe = stat_of(mpjpe);
  m.mpkpe = stat_of(mpkpe);
  m.vel = stat_of(vel);
  m.slip = stat_of(sl);
  m.mpd = stat_of(mpd);
  return m;
}

}  // namespace

MetricsReport assemble_report(const std::vector<EpisodeResult>& episodes,
                              const std::vector<std::string>& clip_names) {
  MetricsReport r;
  std::vector<const EpisodeResult*> all;
  for (std::size_t c = 0; c < clip_names.size(); ++c) {
    std::vector<const EpisodeResult*> eps;
    for (const auto& e : episodes) {
      if (e.clip == c) eps.push_back(&e);
    }
    r.clips.push_back({clip_names[c], summarize(eps)});
  }
  for (const auto& e : episodes) all.push_back(&e);
  r.aggregate = summarize(all);
  return r;
}

}  // namespace fastwbc::evalkit
