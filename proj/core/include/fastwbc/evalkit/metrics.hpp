#pragma once

#include "fastwbc/env/state.hpp"
#include "fastwbc/motion/clip.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace fastwbc::evalkit {

using env::Vec2;

// Robot-side quantities of one control step.
struct RobotFrame {
  Vec2 q = Vec2::Zero();
  std::array<Vec2, 3> keypoints{Vec2::Zero(), Vec2::Zero(), Vec2::Zero()};  // ankle, hip, head
  Vec2 root_vel = Vec2::Zero();
  double foot_xd = 0.0;
  std::array<int, 2> contact{0, 0};
  double com_x = 0.0;
  double cop_x = 0.0;  // world frame, physical
};

RobotFrame robot_frame(const env::PtbModel& model, const env::EnvState& state);

// Per-stream metrics; robot and reference streams must have equal length.
// E_mpjpe: mean |q - q_ref| over joints and frames (root of the mean square
// when rmse is set).
double e_mpjpe(const std::vector<RobotFrame>& robot, const std::vector<motion::MotionFrame>& ref,
               bool rmse = false);
// Mean Euclidean error of ankle, hip and head, world frame.
double e_mpkpe(const std::vector<RobotFrame>& robot, const std::vector<motion::MotionFrame>& ref);
// Mean ||v_root - v_root_ref||.
double e_vel(const std::vector<RobotFrame>& robot, const std::vector<motion::MotionFrame>& ref);
// Mean |foot_xd| over frames with any foot contact.
double slip(const std::vector<RobotFrame>& robot, const std::vector<motion::MotionFrame>& ref);
// Mean |com_x - cop_x|.
double e_mpd(const std::vector<RobotFrame>& robot, const std::vector<motion::MotionFrame>& ref);

struct Stat {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
};
Stat stat_of(const std::vector<double>& values);

struct MetricSet {
  Stat succ, mpjpe, mpkpe, vel, slip, mpd;
  int episodes = 0;
  int successes = 0;
  // Frames tracked before termination (or the full clip) averaged over
  // episodes, so short successful segments are visible next to the errors.
  double mean_tracked_frames = 0.0;
  std::array<int, env::kNumTerminationKinds> terminations{};
};

struct ClipReport {
  std::string name;
  MetricSet metrics;
};

struct MetricsReport {
  std::string checkpoint_id;
  std::string mode;
  std::uint64_t seed = 0;
  int episodes_per_clip = 0;
  bool domain_rand = true;
  std::vector<ClipReport> clips;
  MetricSet aggregate;
};

// Outcome of one episode used to assemble a report.
struct EpisodeResult {
  std::size_t clip = 0;
  bool success = false;
  env::Termination termination = env::Termination::None;
  std::size_t tracked_frames = 0;
  double mpjpe = 0, mpkpe = 0, vel = 0, slip = 0, mpd = 0;
};

// Metrics of one episode from its aligned streams.
EpisodeResult score_episode(std::size_t clip, const std::vector<RobotFrame>& robot,
                            const std::vector<motion::MotionFrame>& ref, bool success,
                            env::Termination termination, bool rmse);

// Per-clip and aggregate statistics; episodes without tracked frames are left
// out of the error statistics but count towards Succ.
MetricsReport assemble_report(const std::vector<EpisodeResult>& episodes,
                              const std::vector<std::string>& clip_names);

}  // namespace fastwbc::evalkit
