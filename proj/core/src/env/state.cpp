#include "fastwbc/env/state.hpp"

#include "fastwbc/error.hpp"
#include "fastwbc/motion/clip.hpp"

#include <algorithm>
#include <cmath>

namespace fastwbc::env {

namespace {

void require_finite_state(const EnvState& s) {
  const bool ok = s.q.allFinite() && s.qd.allFinite() && std::isfinite(s.foot_x) &&
                  std::isfinite(s.foot_xd);
  if (!ok) {
    throw NumericalError("dynamics_step: non-finite state at t = " + std::to_string(s.t));
  }
}

}  // namespace

EnvState dynamics_step(const PtbModel& model, const EnvState& state, const Vec2& tau, double dt) {
  EnvState next = state;
  const Vec2 qdd = forward_dynamics(model, state.q, state.qd, tau);
  next.qd = state.qd + dt * qdd;
  next.q = state.q + dt * next.qd;
  next.foot_x = state.foot_x + dt * state.foot_xd;
  next.t = state.t + dt;
  require_finite_state(next);
  return next;
}

Vec2 action_scale(const PtbModel& model) {
  return (0.25 * model.tau_max.array() / model.kp.array()).matrix();
}

Vec2 action_to_target(const PtbModel& model, const Vec2& a) {
  return model.q_default + action_scale(model).cwiseProduct(a);
}

Vec2 pd_torque(const PtbModel& model, const Vec2& q_target, const EnvState& state) {
  const Vec2 raw = model.kp.cwiseProduct(q_target - state.q) - model.kd.cwiseProduct(state.qd);
  return raw.cwiseMax(-model.tau_max).cwiseMin(model.tau_max);
}

CopInfo compute_cop(const PtbModel& model, const EnvState& state, const Vec2& tau) {
  const Vec2 qdd = forward_dynamics(model, state.q, state.qd, tau);
  const double normal = model.total_mass() * (model.g + com_acceleration(model, state.q, state.qd, qdd)(1));
  CopInfo info{};
  info.normal = normal;
  if (normal > 0.0) {
    info.cop_x = tau(0) / normal;
    info.within = std::abs(info.cop_x) <= model.foot_half;
  } else {
    // No support force: the demand is unbounded on the side of the torque.
    info.cop_x = tau(0) >= 0.0 ? HUGE_VAL : -HUGE_VAL;
    info.within = false;
  }
  info.physical = std::clamp(info.cop_x, -model.foot_half, model.foot_half);
  return info;
}

Vec2 compute_com(const PtbModel& model, const EnvState& state) {
  return state.ankle() + com_offset(model, state.q);
}

std::array<int, 2> robot_contacts(const EnvState& state) {
  if (state.cop_x < 0.0) return {1, 0};
  return {0, 1};
}

BodyState body_state(const PtbModel& model, const EnvState& state) {
  BodyState b;
  b.pos = forward_kinematics(model, state.q, state.ankle());
  b.vel = keypoint_velocities(model, state.q, state.qd, state.foot_xd);
  const double th2 = state.q(0) + state.q(1);
  const double th2d = state.qd(0) + state.qd(1);
  b.body_ang = {state.q(0), th2, th2};
  b.body_angvel = {state.qd(0), th2d, th2d};
  b.com = compute_com(model, state);
  return b;
}

RefBodyState ref_body_state(const PtbModel& model, const motion::MotionFrame& ref) {
  RefBodyState r;
  r.vel = keypoint_velocities(model, ref.joints, ref.joint_vel, 0.0);
  r.body_ang = {ref.joints(0), ref.root_ang, ref.root_ang};
  r.body_angvel = {ref.joint_vel(0), ref.ang_vel, ref.ang_vel};
  return r;
}

void validate_frame(const motion::MotionFrame& ref) {
  const auto& k = ref.keypoints;
  const bool ok = ref.root_pos.allFinite() && std::isfinite(ref.root_ang) &&
                  ref.joints.allFinite() && ref.joint_vel.allFinite() && k.ankle.allFinite() &&
                  k.hip.allFinite() && k.head.allFinite() && k.heel.allFinite() &&
                  k.toe.allFinite() && ref.lin_vel.allFinite() && std::isfinite(ref.ang_vel) &&
                  ref.com.allFinite() && std::isfinite(ref.cop_x);
  if (!ok) throw ValidationError("reference frame has non-finite entries");
}

namespace {

// Reference d_ref clipped so invalid frames stay finite in the observation.
constexpr double kMaxObsDistance = 1.0;

void fill_actor(const PtbModel& model, const EnvState& state, const motion::MotionFrame& ref,
                numcore::Vector& o) {
  validate_frame(ref);
  const BodyState b = body_state(model, state);
  const Keypoints& r = ref.keypoints;
  const double d_ref =
      std::min(motion::ref_com_cop_distance(ref, model.foot_half), kMaxObsDistance);
  const Vec2 ankle_diff = (r.ankle - r.hip) - (b.pos.ankle - b.pos.hip);
  const Vec2 head_diff = (r.head - r.hip) - (b.pos.head - b.pos.hip);
  o << state.q, state.qd, b.body_ang[1], b.body_angvel[1], b.pos.hip, b.vel.hip,
      state.last_action, ref.joints, ref.joint_vel, ankle_diff, head_diff, ref.lin_vel,
      ref.ang_vel, ref.com(0) - r.ankle(0), ref.com(1), ref.cop_x - r.ankle(0), d_ref;
}

}  // namespace

numcore::Vector build_actor_obs(const PtbModel& model, const EnvState& state,
                                const motion::MotionFrame& ref) {
  numcore::Vector o(static_cast<Eigen::Index>(kActorObsDim));
  fill_actor(model, state, ref, o);
  return o;
}

numcore::Vector build_critic_obs(const PtbModel& model, const EnvState& state,
                                 const motion::MotionFrame& ref) {
  numcore::Vector o(static_cast<Eigen::Index>(kCriticObsDim));
  auto head = o.head(static_cast<Eigen::Index>(kActorObsDim));
  numcore::Vector actor(static_cast<Eigen::Index>(kActorObsDim));
  fill_actor(model, state, ref, actor);
  head = actor;
  const Vec2 com = compute_com(model, state);
  const auto c = robot_contacts(state);
  o.tail(7) << com(0) - state.foot_x, com(1), state.cop_x, c[0], c[1], ref.contact[0],
      ref.contact[1];
  return o;
}

std::string termination_name(Termination t) {
  switch (t) {
    case Termination::None: return "none";
    case Termination::Fall: return "fall";
    case Termination::TrackingFailure: return "tracking_failure";
    case Termination::Tipped: return "tipped";
    case Termination::GlobalDrift: return "global_drift";
  }
  return "none";
}

EvalMode parse_eval_mode(const std::string& s) {
  if (s == "train") return EvalMode::Train;
  if (s == "eval_2m") return EvalMode::Eval2m;
  if (s == "eval_1p5m") return EvalMode::Eval1p5m;
  throw ValidationError("unknown eval mode '" + s + "' (expected train|eval_2m|eval_1p5m)");
}

std::string eval_mode_name(EvalMode m) {
  switch (m) {
    case EvalMode::Train: return "train";
    case EvalMode::Eval2m: return "eval_2m";
    case EvalMode::Eval1p5m: return "eval_1p5m";
  }
  return "train";
}

Termination check_termination(const PtbModel& model, const EnvState& state,
                              const motion::MotionFrame& ref, EvalMode mode) {
  const Keypoints k = forward_kinematics(model, state.q, state.ankle());
  const double root_ang = state.q(0) + state.q(1);
  if (std::abs(k.hip(1) - ref.keypoints.hip(1)) > kHeightTolerance) return Termination::Fall;
  if (mode == EvalMode::Train && std::abs(wrap_angle(root_ang - ref.root_ang)) > kOrientTolerance) {
    return Termination::Fall;
  }
  if (mode != EvalMode::Eval1p5m &&
      std::abs(k.head(1) - ref.keypoints.head(1)) > kHeightTolerance) {
    return Termination::TrackingFailure;
  }
  if (state.tip_substeps * kPhysicsDt > kTipLimit + 1e-12) return Termination::Tipped;
  const double drift = std::abs(k.hip(0) - ref.keypoints.hip(0));
  if (mode == EvalMode::Eval2m && drift > 2.0) return Termination::GlobalDrift;
  if (mode == EvalMode::Eval1p5m && drift > 1.5) return Termination::GlobalDrift;
  return Termination::None;
}

void DomainRandCfg::validate() const {
  const bool ok = joint_offset_range >= 0 && com_offset_range >= 0 && push_vel >= 0 &&
                  push_interval_min > 0 && push_interval_max >= push_interval_min;
  if (!ok) throw ValidationError("DomainRandCfg: ranges must be non-negative and ordered");
}

PtbModel apply_domain_rand(const PtbModel& model, const DomainRandCfg& cfg, numcore::Prng& rng) {
  PtbModel out = model;
  if (cfg.joint_offset) {
    for (int j = 0; j < 2; ++j) {
      out.q_default(j) += rng.uniform(-cfg.joint_offset_range, cfg.joint_offset_range);
    }
  }
  if (cfg.com_offset) {
    out.com_offset_x = model.com_offset_x + rng.uniform(-cfg.com_offset_range, cfg.com_offset_range);
  }
  return out;
}

double next_push_delay(const DomainRandCfg& cfg, numcore::Prng& rng) {
  return rng.uniform(cfg.push_interval_min, cfg.push_interval_max);
}

Vec2 push_to_joint_velocity(const PtbModel& model, const Vec2& q, double dv) {
  const double c = std::cos(q(0));
  if (std::abs(c) < 1e-6) return Vec2::Zero();
  const double dq1 = -dv / (model.l1 * c);
  return {dq1, -dq1};
}

EnvState reset_to_frame(const motion::MotionClip& clip, std::size_t frame, numcore::Prng& rng,
                        const DomainRandCfg& cfg) {
  if (frame >= clip.frames.size()) {
    throw ValidationError("reset_to_frame: frame " + std::to_string(frame) + " outside clip '" +
                          clip.name + "'");
  }
  const motion::MotionFrame& f = clip.frames[frame];
  EnvState s;
  s.q = f.joints;
  s.qd = f.joint_vel;
  s.foot_x = f.keypoints.ankle(0);
  s.frame_idx = frame;
  s.t = static_cast<double>(frame) / clip.fps;
  if (cfg.joint_offset) {
    for (int j = 0; j < 2; ++j) s.q(j) += rng.uniform(-cfg.joint_offset_range, cfg.joint_offset_range);
  }
  return s;
}

}  // namespace fastwbc::env
