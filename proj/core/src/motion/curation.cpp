#include "fastwbc/motion/curation.hpp"

#include "fastwbc/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fastwbc::motion {

namespace {

void require_frames(const MotionClip& clip, const char* op) {
  if (clip.frames.size() < 2) {
    throw ValidationError(std::string(op) + ": clip '" + clip.name + "' has fewer than 2 frames");
  }
}

// Central differences of a per-frame signal, one-sided at the ends.
template <typename Get>
auto differentiate(const std::vector<MotionFrame>& frames, double fps, Get get) {
  using T = std::decay_t<decltype(get(frames[0]))>;
  const std::size_t n = frames.size();
  std::vector<T> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t lo = k == 0 ? 0 : k - 1;
    const std::size_t hi = k + 1 == n ? n - 1 : k + 1;
    out[k] = (get(frames[hi]) - get(frames[lo])) * (fps / static_cast<double>(hi - lo));
  }
  return out;
}

Vec2 lerp(const Vec2& a, const Vec2& b, double w) { return a + w * (b - a); }

}  // namespace

MotionClip fk_fill(const MotionClip& clip, const env::PtbModel& model) {
  require_frames(clip, "fk_fill");
  MotionClip out = clip;
  for (auto& f : out.frames) {
    f.keypoints = env::forward_kinematics(model, f.joints, f.keypoints.ankle);
    f.root_pos = f.keypoints.hip;
    f.root_ang = f.joints(0) + f.joints(1);
  }
  const auto qd = differentiate(out.frames, out.fps, [](const MotionFrame& f) { return f.joints; });
  const auto vd = differentiate(out.frames, out.fps, [](const MotionFrame& f) { return f.root_pos; });
  const auto wd = differentiate(out.frames, out.fps, [](const MotionFrame& f) { return f.root_ang; });
  for (std::size_t k = 0; k < out.frames.size(); ++k) {
    out.frames[k].joint_vel = qd[k];
    out.frames[k].lin_vel = vd[k];
    out.frames[k].ang_vel = wd[k];
  }
  return out;
}

MotionClip augment_speed(const MotionClip& clip, double factor, const env::PtbModel& model) {
  if (!(factor >= 0.5 && factor <= 2.0)) {
    throw ValidationError("augment_speed: factor must lie in [0.5, 2.0]");
  }
  require_frames(clip, "augment_speed");
  const auto n_out = static_cast<std::size_t>(
      std::llround(static_cast<double>(clip.frames.size()) / factor));
  if (n_out < 2) throw ValidationError("augment_speed: resampled clip has fewer than 2 frames");
  MotionClip out = clip;
  out.frames.assign(n_out, MotionFrame{});
  const double last = static_cast<double>(clip.frames.size() - 1);
  for (std::size_t k = 0; k < n_out; ++k) {
    const double src = std::min(static_cast<double>(k) * factor, last);
    const auto i0 = static_cast<std::size_t>(std::floor(src));
    const std::size_t i1 = std::min(i0 + 1, clip.frames.size() - 1);
    const double w = src - static_cast<double>(i0);
    const MotionFrame& a = clip.frames[i0];
    const MotionFrame& b = clip.frames[i1];
    MotionFrame& f = out.frames[k];
    f = a;
    f.joints = lerp(a.joints, b.joints, w);
    f.keypoints.ankle = lerp(a.keypoints.ankle, b.keypoints.ankle, w);
  }
  out.meta["speed_factor"] = factor;
  return fk_fill(out, model);
}

MotionClip augment_joint_perturb(const MotionClip& clip, std::size_t joint, double delta,
                                 const std::set<std::size_t>& comp_joints,
                                 const env::PtbModel& model) {
  if (joint > 1) throw ValidationError("augment_joint_perturb: joint index out of range");
  for (std::size_t c : comp_joints) {
    if (c > 1) throw ValidationError("augment_joint_perturb: compensating index out of range");
    if (c == joint) throw ValidationError("augment_joint_perturb: joint and comp_joints overlap");
  }
  require_frames(clip, "augment_joint_perturb");
  MotionClip out = clip;
  for (auto& f : out.frames) {
    f.joints(static_cast<Eigen::Index>(joint)) += delta;
    for (std::size_t c : comp_joints) f.joints(static_cast<Eigen::Index>(c)) -= 0.5 * delta;
  }
  return fk_fill(out, model);
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw ValidationError("quantile: empty input");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

MotionClip adjust_height(const MotionClip& clip, double clearance) {
  if (clip.frames.empty()) throw ValidationError("adjust_height: empty clip");
  std::vector<double> foot;
  foot.reserve(clip.frames.size());
  for (const auto& f : clip.frames) {
    foot.push_back(std::min(f.keypoints.heel(1), f.keypoints.toe(1)));
  }
  const double offset = clearance - quantile(foot, kHeightQuantile);
  MotionClip out = clip;
  for (auto& f : out.frames) {
    f.root_pos(1) += offset;
    for (Vec2* kp : {&f.keypoints.ankle, &f.keypoints.hip, &f.keypoints.head,
                     &f.keypoints.heel, &f.keypoints.toe}) {
      (*kp)(1) += offset;
    }
    f.com(1) += offset;
  }
  out.meta["height_offset"] = offset;
  out.meta["height_clearance"] = clearance;
  return out;
}

MotionClip estimate_contacts(const MotionClip& clip, double z_thresh) {
  MotionClip out = clip;
  for (auto& f : out.frames) {
    if (!f.cop_valid) {
      f.contact = {0, 0};
      continue;
    }
    const double rel = f.cop_x - f.keypoints.ankle.x();
    const bool heel_down = f.keypoints.heel(1) < z_thresh;
    const bool toe_down = f.keypoints.toe(1) < z_thresh;
    f.contact = {heel_down && rel < 0.0 ? 1 : 0, toe_down && rel >= 0.0 ? 1 : 0};
  }
  out.meta["contact_threshold"] = z_thresh;
  return out;
}

MotionClip extract_com_cop(const MotionClip& clip, const env::PtbModel& model) {
  require_frames(clip, "extract_com_cop");
  MotionClip out = clip;
  const auto qdd = differentiate(out.frames, out.fps, [](const MotionFrame& f) { return f.joint_vel; });
  bool aggressive = false;
  for (std::size_t k = 0; k < out.frames.size(); ++k) {
    MotionFrame& f = out.frames[k];
    f.com = f.keypoints.ankle + env::com_offset(model, f.joints);
    const Vec2 tau = env::inverse_dynamics(model, f.joints, f.joint_vel, qdd[k]);
    const Vec2 acc = env::com_acceleration(model, f.joints, f.joint_vel, qdd[k]);
    const double normal = model.total_mass() * (model.g + acc(1));
    if (normal <= 0.0) {
      f.cop_valid = false;
      f.cop_x = f.keypoints.ankle.x();
      aggressive = true;
    } else {
      f.cop_valid = true;
      f.cop_x = f.keypoints.ankle.x() + tau(0) / normal;
    }
  }
  if (aggressive) out.tags.insert("aggressive");
  return out;
}

double velocity_consistency_error(const MotionClip& clip) {
  if (clip.frames.size() < 2) return 0.0;
  const auto qd = differentiate(clip.frames, clip.fps, [](const MotionFrame& f) { return f.joints; });
  const auto vd = differentiate(clip.frames, clip.fps, [](const MotionFrame& f) { return f.root_pos; });
  const auto wd = differentiate(clip.frames, clip.fps, [](const MotionFrame& f) { return f.root_ang; });
  double worst = 0.0;
  for (std::size_t k = 0; k < clip.frames.size(); ++k) {
    const auto& f = clip.frames[k];
    worst = std::max({worst, (f.joint_vel - qd[k]).cwiseAbs().maxCoeff(),
                      (f.lin_vel - vd[k]).cwiseAbs().maxCoeff(), std::abs(f.ang_vel - wd[k])});
  }
  return worst;
}

}  // namespace fastwbc::motion
