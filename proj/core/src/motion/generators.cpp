#include "fastwbc/motion/generators.hpp"

#include "fastwbc/error.hpp"
#include "fastwbc/motion/curation.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

namespace fastwbc::motion {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

template <typename JointFn>
MotionClip from_joint_trajectory(std::string name, std::size_t frames, JointFn joints,
                                 const env::PtbModel& model) {
  MotionClip clip;
  clip.name = std::move(name);
  clip.fps = kClipFps;
  clip.frames.resize(frames);
  for (std::size_t k = 0; k < frames; ++k) {
    clip.frames[k].joints = joints(static_cast<double>(k) / kClipFps);
  }
  return extract_com_cop(fk_fill(clip, model), model);
}

std::string fmt(const char* pattern, double a, double b) {
  char buf[96];
  std::snprintf(buf, sizeof buf, pattern, a, b);
  return buf;
}

}  // namespace

MotionClip gen_sway(double amp, double freq, double duration, double phase,
                    const env::PtbModel& model) {
  if (!(amp > 0.0 && amp <= 0.6)) throw ValidationError("gen_sway: amp must lie in (0, 0.6]");
  if (!(freq > 0.0 && freq <= 2.0)) throw ValidationError("gen_sway: freq must lie in (0, 2]");
  if (!(duration >= 1.0)) throw ValidationError("gen_sway: duration must be >= 1 s");
  const auto n = static_cast<std::size_t>(std::llround(duration * kClipFps));
  return from_joint_trajectory(
      fmt("sway_a%.3f_f%.3f", amp, freq), n,
      [&](double t) {
        const double q1 = amp * std::sin(kTwoPi * freq * t + phase);
        return Vec2(q1, -q1);
      },
      model);
}

MotionClip gen_squat(double amp, double freq, double duration, const env::PtbModel& model) {
  if (!(amp > 0.0 && amp <= 1.2)) throw ValidationError("gen_squat: amp must lie in (0, 1.2]");
  if (!(freq > 0.0 && freq <= 2.0)) throw ValidationError("gen_squat: freq must lie in (0, 2]");
  if (!(duration >= 1.0)) throw ValidationError("gen_squat: duration must be >= 1 s");
  const auto n = static_cast<std::size_t>(std::llround(duration * kClipFps));
  return from_joint_trajectory(
      fmt("squat_a%.3f_f%.3f", amp, freq), n,
      [&](double t) {
        const double q2 = -amp * (1.0 - std::cos(kTwoPi * freq * t)) / 2.0;
        return Vec2(-q2 / 2.0, q2);
      },
      model);
}

MotionClip gen_lean_hold(double lean, double hold, const env::PtbModel& model) {
  if (!(lean > 0.0 && lean <= 0.5)) throw ValidationError("gen_lean_hold: lean must lie in (0, 0.5]");
  if (!(hold >= 0.0)) throw ValidationError("gen_lean_hold: hold must be >= 0");
  constexpr double ramp = 1.0;
  const auto n = static_cast<std::size_t>(std::llround((ramp + hold) * kClipFps)) + 1;
  MotionClip clip = from_joint_trajectory(
      fmt("lean_l%.3f_h%.1f", lean, hold), n,
      [&](double t) {
        const double s = t >= ramp ? 1.0 : 0.5 * (1.0 - std::cos(std::numbers::pi * t / ramp));
        return Vec2(lean * s, 0.0);
      },
      model);
  return clip;
}

Preset parse_preset(const std::string& name) {
  if (name == "source") return Preset::Source;
  if (name == "target") return Preset::Target;
  if (name == "aggressive") return Preset::Aggressive;
  throw ValidationError("unknown preset '" + name + "' (expected source|target|aggressive)");
}

std::string preset_name(Preset p) {
  switch (p) {
    case Preset::Source: return "source";
    case Preset::Target: return "target";
    case Preset::Aggressive: return "aggressive";
  }
  return "source";
}

std::vector<MotionClip> make_preset(Preset preset, std::uint64_t seed, const env::PtbModel& model) {
  numcore::Prng rng(numcore::Prng::sub_seed(seed, numcore::tags::kMotion));
  constexpr double duration = 8.0;
  std::vector<MotionClip> clips;
  auto add = [&](MotionClip c, const char* tag) {
    c.tags.insert(tag);
    c.tags.insert(preset_name(preset));
    c.name = preset_name(preset) + "_" + std::to_string(clips.size()) + "_" + c.name;
    clips.push_back(std::move(c));
  };
  auto jitter = [&](double v) { return v * rng.uniform(0.9, 1.0); };
  auto phase = [&] { return rng.uniform(0.0, kTwoPi); };

  switch (preset) {
    case Preset::Source: {
      // Sway amplitudes stay where the required CoP fits under the foot.
      const double sway[4][2] = {{0.08, 0.25}, {0.10, 0.5}, {0.12, 0.3}, {0.14, 0.4}};
      const double squat[4][2] = {{0.12, 0.25}, {0.16, 0.3}, {0.18, 0.5}, {0.20, 0.4}};
      for (const auto& p : sway) add(gen_sway(jitter(p[0]), p[1], duration, phase(), model), "source");
      for (const auto& p : squat) add(gen_squat(jitter(p[0]), p[1], duration, model), "source");
      break;
    }
    case Preset::Target: {
      for (int i = 0; i < 3; ++i) {
        add(gen_sway(rng.uniform(0.25, 0.45), rng.uniform(0.8, 1.5), duration, phase(), model), "target");
      }
      for (int i = 0; i < 3; ++i) {
        add(gen_squat(rng.uniform(0.25, 0.45), rng.uniform(0.8, 1.5), duration, model), "target");
      }
      add(gen_lean_hold(rng.uniform(0.3, 0.45), duration - 1.0, model), "target");
      add(gen_lean_hold(rng.uniform(0.3, 0.45), duration - 1.0, model), "target");
      break;
    }
    case Preset::Aggressive: {
      add(gen_lean_hold(0.4, duration - 1.0, model), "aggressive");
      add(gen_lean_hold(rng.uniform(0.3, 0.45), duration - 1.0, model), "aggressive");
      add(gen_sway(rng.uniform(0.25, 0.35), rng.uniform(0.8, 1.2), duration, phase(), model), "aggressive");
      add(gen_squat(rng.uniform(0.4, 0.6), rng.uniform(0.8, 1.2), duration, model), "aggressive");
      add(gen_sway(jitter(0.10), 0.3, duration, phase(), model), "benign");
      add(gen_sway(jitter(0.14), 0.4, duration, phase(), model), "benign");
      add(gen_squat(jitter(0.16), 0.3, duration, model), "benign");
      add(gen_squat(jitter(0.20), 0.5, duration, model), "benign");
      break;
    }
  }
  for (auto& c : clips) c = estimate_contacts(c, kDefaultContactThreshold);
  return clips;
}

}  // namespace fastwbc::motion
