#pragma once

#include "fastwbc/env/model.hpp"

#include <array>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace fastwbc::motion {

using env::Keypoints;
using env::Vec2;

inline constexpr double kClipFps = 50.0;

// One reference frame. The root is the hip (anchor body); root_ang is the
// torso's absolute angle.
struct MotionFrame {
  Vec2 root_pos = Vec2::Zero();
  double root_ang = 0.0;
  Vec2 joints = Vec2::Zero();
  Vec2 joint_vel = Vec2::Zero();
  Keypoints keypoints{Vec2::Zero(), Vec2::Zero(), Vec2::Zero(), Vec2::Zero(), Vec2::Zero()};
  Vec2 lin_vel = Vec2::Zero();
  double ang_vel = 0.0;
  std::array<int, 2> contact{0, 0};  // (heel, toe)
  Vec2 com = Vec2::Zero();
  double cop_x = 0.0;
  // False when inverse dynamics demanded a non-positive normal force.
  bool cop_valid = true;
};

struct MotionClip {
  std::string name;
  double fps = kClipFps;
  std::vector<MotionFrame> frames;
  std::set<std::string> tags;
  // Free-form numeric annotations (e.g. curation offsets).
  std::map<std::string, double> meta;

  std::size_t size() const { return frames.size(); }
  double duration() const;
};

struct MotionLibrary {
  std::vector<MotionClip> clips;
  std::size_t clip_len = 100;  // frames per sampling segment

  void validate() const;
};

// Horizontal distance between the reference CoM and the supportable CoP
// (the inverse-dynamics CoP clamped to the foot). +inf for invalid frames.
double ref_com_cop_distance(const MotionFrame& f, double foot_half);

// Contiguous [start, end) ranges of clip_len frames; a short remainder is
// merged into the last range.
std::vector<std::pair<std::size_t, std::size_t>> segment_clips(std::size_t num_frames,
                                                               std::size_t clip_len);

}  // namespace fastwbc::motion
