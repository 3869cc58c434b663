#pragma once

#include "fastwbc/env/model.hpp"
#include "fastwbc/motion/clip.hpp"

#include <cstddef>
#include <set>

namespace fastwbc::motion {

inline constexpr std::size_t kAnkle = 0;
inline constexpr std::size_t kHip = 1;
inline constexpr double kDefaultContactThreshold = 0.01;
inline constexpr double kHeightQuantile = 0.25;

// Keypoints by forward kinematics from each frame's ankle position; joint,
// root and angular velocities by central differences (one-sided at the ends).
MotionClip fk_fill(const MotionClip& clip, const env::PtbModel& model);

// Time axis rescaled by 1 / factor at fixed 50 fps with linear interpolation,
// then fk_fill. factor in [0.5, 2].
MotionClip augment_speed(const MotionClip& clip, double factor, const env::PtbModel& model);

// q[joint] += delta, q[c] -= delta / 2 for each compensating joint, then fk_fill.
MotionClip augment_joint_perturb(const MotionClip& clip, std::size_t joint, double delta,
                                 const std::set<std::size_t>& comp_joints,
                                 const env::PtbModel& model);

// Linear-interpolation quantile (positions (n - 1) p between order statistics).
double quantile(std::vector<double> values, double p);

// Single vertical offset so the 25th percentile of per-frame min(heel_z, toe_z)
// equals `clearance`. The applied offset is recorded in meta["height_offset"].
MotionClip adjust_height(const MotionClip& clip, double clearance);

// heel = heel_z < z_thresh and cop_x < foot centre; toe = toe_z < z_thresh and
// cop_x >= foot centre. Frames with an invalid CoP get no contact.
MotionClip estimate_contacts(const MotionClip& clip, double z_thresh);

// CoM from mass-weighted link centres; CoP from inverse dynamics with
// finite-difference accelerations, cop_x = ankle_x + tau_ankle / F_n, left
// unclamped. Frames with F_n <= 0 are marked invalid and the clip is tagged
// "aggressive".
MotionClip extract_com_cop(const MotionClip& clip, const env::PtbModel& model);

// Max over frames of |velocity - central difference| for joints, root and
// torso angle; used to check the frame-velocity invariant.
double velocity_consistency_error(const MotionClip& clip);

}  // namespace fastwbc::motion
