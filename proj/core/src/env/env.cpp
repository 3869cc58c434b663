#include "fastwbc/env/env.hpp"

#include "fastwbc/error.hpp"

#include <algorithm>
#include <cmath>

namespace fastwbc::env {

namespace {

// Cap on the out-of-foot excess used for the slip rate when the support force
// vanishes and the demanded CoP is unbounded.
constexpr double kMaxTipExcess = 1.0;

void physics_substep(EnvState& s, const Vec2& q_target, const PtbModel& model) {
  const Vec2 tau = pd_torque(model, q_target, s);
  const CopInfo cop = compute_cop(model, s, tau);
  s.cop_x = cop.physical;
  s.normal_force = cop.normal;
  if (cop.within) {
    s.tip_substeps = 0;
    s.foot_xd = 0.0;
    s.tipped = false;
  } else {
    ++s.tip_substeps;
    s.tipped = true;
    const double excess = std::min(std::abs(cop.cop_x) - model.foot_half, kMaxTipExcess);
    const double com_z = std::max(com_offset(model, s.q)(1), 0.05);
    s.foot_xd = std::copysign(excess, cop.cop_x) * std::sqrt(model.g / com_z);
  }
  s = dynamics_step(model, s, tau, kPhysicsDt);
}

}  // namespace

StepResult env_step(EnvState& state, const Vec2& action, const motion::MotionClip& clip,
                    const PtbModel& model, const EnvConfig& cfg) {
  if (state.frame_idx + 1 >= clip.frames.size()) {
    throw ValidationError("env_step: frame cursor at the end of clip '" + clip.name + "'");
  }
  if (!action.allFinite()) throw NumericalError("env_step: non-finite action");
  const Vec2 q_target = action_to_target(model, action);
  for (int k = 0; k < kSubsteps; ++k) physics_substep(state, q_target, model);
  state.prev_action = state.last_action;
  state.last_action = action;
  ++state.frame_idx;

  const motion::MotionFrame& ref = clip.frames[state.frame_idx];
  StepResult r;
  r.termination = check_termination(model, state, ref, cfg.mode);

  r.terms = reward::tracking_terms(model, state, ref, cfg.weights);
  reward::AuxSignals aux;
  aux.action = action;
  aux.last_action = state.prev_action;
  aux.terminated = r.termination != Termination::None;
  aux.joint_limit_violation = reward::joint_limit_violation(model, state.q);
  const Keypoints kp = forward_kinematics(model, state.q, state.ankle());
  aux.ground_collisions = reward::ground_collisions(kp);
  const Vec2 com = compute_com(model, state);
  reward::add_aux_terms(r.terms, aux, robot_contacts(state), ref.contact, com(0),
                        state.foot_x + state.cop_x, cfg.weights, cfg.flags);
  r.w_track = cfg.flags.use_w_track
                  ? reward::adaptive_weight(motion::ref_com_cop_distance(ref, model.foot_half),
                                            cfg.adaptive)
                  : 1.0;
  r.reward = reward::total_reward(r.terms, r.w_track, cfg.weights);
  const bool last = state.frame_idx + 1 == clip.frames.size();
  r.done = aux.terminated || last;
  r.success = !aux.terminated && last;
  return r;
}

BalancerEnv::BalancerEnv(EnvConfig cfg, std::uint64_t seed)
    : cfg_(std::move(cfg)), model_(cfg_.model), rng_(seed) {
  cfg_.model.validate();
  cfg_.dr.validate();
  cfg_.weights.validate();
  cfg_.adaptive.validate();
}

void BalancerEnv::reset(const motion::MotionClip& clip, std::size_t start_frame) {
  if (clip.frames.size() < 2 || start_frame + 1 >= clip.frames.size()) {
    throw ValidationError("BalancerEnv::reset: start frame must leave at least one step in clip '" +
                          clip.name + "'");
  }
  clip_ = &clip;
  model_ = apply_domain_rand(cfg_.model, cfg_.dr, rng_);
  state_ = reset_to_frame(clip, start_frame, rng_, cfg_.dr);
  // Physical CoP of the holding torque at the reset pose.
  const CopInfo cop = compute_cop(model_, state_, gravity_forces(model_, state_.q));
  state_.cop_x = cop.physical;
  state_.normal_force = cop.normal;
  next_push_ = cfg_.dr.push ? state_.t + next_push_delay(cfg_.dr, rng_) : HUGE_VAL;
}

StepResult BalancerEnv::step(const Vec2& action) {
  if (clip_ == nullptr) throw ValidationError("BalancerEnv::step called before reset");
  if (state_.t >= next_push_) {
    const double dv = rng_.uniform(-cfg_.dr.push_vel, cfg_.dr.push_vel);
    state_.qd += push_to_joint_velocity(model_, state_.q, dv);
    next_push_ = state_.t + next_push_delay(cfg_.dr, rng_);
  }
  return env_step(state_, action, *clip_, model_, cfg_);
}

EnvSnapshot BalancerEnv::snapshot() const {
  return {model_, state_, rng_.state(), next_push_};
}

void BalancerEnv::restore(const EnvSnapshot& snap, const motion::MotionClip& clip) {
  if (snap.state.frame_idx + 1 >= clip.frames.size()) {
    throw ValidationError("BalancerEnv::restore: frame cursor outside clip '" + clip.name + "'");
  }
  clip_ = &clip;
  model_ = snap.model;
  state_ = snap.state;
  rng_ = numcore::Prng::from_state(snap.rng_state);
  next_push_ = snap.next_push;
}

const motion::MotionFrame& BalancerEnv::target_frame() const {
  const std::size_t idx = std::min(state_.frame_idx + 1, clip_->frames.size() - 1);
  return clip_->frames[idx];
}

numcore::Vector BalancerEnv::actor_obs() const {
  return build_actor_obs(model_, state_, target_frame());
}

numcore::Vector BalancerEnv::critic_obs() const {
  return build_critic_obs(model_, state_, target_frame());
}

}  // namespace fastwbc::env
