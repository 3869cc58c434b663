#pragma once

#include "fastwbc/env/model.hpp"
#include "fastwbc/motion/clip.hpp"
#include "fastwbc/numcore/linalg.hpp"
#include "fastwbc/numcore/prng.hpp"

#include <array>
#include <cstddef>
#include <string>

namespace fastwbc::env {

inline constexpr double kPhysicsDt = 0.002;
inline constexpr int kSubsteps = 10;
inline constexpr double kControlDt = kPhysicsDt * kSubsteps;
inline constexpr double kTipLimit = 0.04;  // s of sustained out-of-foot CoP demand

inline constexpr std::size_t kActorObsDim = 27;
inline constexpr std::size_t kCriticObsDim = 34;
// Bumped whenever the observation layout changes; stored in checkpoints.
inline constexpr int kObsLayoutVersion = 1;

struct EnvState {
  Vec2 q = Vec2::Zero();
  Vec2 qd = Vec2::Zero();
  double foot_x = 0.0;   // ankle position along the ground
  double foot_xd = 0.0;  // nonzero only while tipping
  bool tipped = false;
  int tip_substeps = 0;  // consecutive physics steps with out-of-foot demand
  double t = 0.0;
  Vec2 last_action = Vec2::Zero();
  Vec2 prev_action = Vec2::Zero();
  std::size_t frame_idx = 0;
  // Physical CoP (relative to the foot centre) and normal force from the
  // latest physics step.
  double cop_x = 0.0;
  double normal_force = 0.0;

  double tip_duration() const { return tip_substeps * kPhysicsDt; }
  Vec2 ankle() const { return Vec2(foot_x, 0.0); }
};

struct CopInfo {
  double cop_x;     // demanded CoP relative to the foot centre, unclamped
  double normal;    // F_n = M (g + z_com'')
  bool within;      // F_n > 0 and |cop_x| <= d_f
  double physical;  // cop_x clamped to the foot
};

// Semi-implicit Euler: qd += qdd dt, then q += qd dt. Throws NumericalError on
// a non-finite result.
EnvState dynamics_step(const PtbModel& model, const EnvState& state, const Vec2& tau, double dt);

// q_target = q_default + alpha a with alpha_j = 0.25 tau_max_j / kp_j.
Vec2 action_to_target(const PtbModel& model, const Vec2& a);
Vec2 action_scale(const PtbModel& model);

// clamp(kp (q_target - q) - kd qd, +-tau_max)
Vec2 pd_torque(const PtbModel& model, const Vec2& q_target, const EnvState& state);

// CoP demanded by the applied torque at the current state.
CopInfo compute_cop(const PtbModel& model, const EnvState& state, const Vec2& tau);

// World-frame centre of mass.
Vec2 compute_com(const PtbModel& model, const EnvState& state);

// Robot contact flags (heel, toe) from the physical CoP side.
std::array<int, 2> robot_contacts(const EnvState& state);

// Everything the rewards, observations and metrics read from the robot.
struct BodyState {
  Keypoints pos;
  Keypoints vel;
  std::array<double, 3> body_ang;     // ankle (shank), hip (torso), head (torso)
  std::array<double, 3> body_angvel;
  Vec2 com;
};
BodyState body_state(const PtbModel& model, const EnvState& state);

// Reference-side counterparts for a motion frame.
struct RefBodyState {
  Keypoints vel;
  std::array<double, 3> body_ang;
  std::array<double, 3> body_angvel;
};
RefBodyState ref_body_state(const PtbModel& model, const motion::MotionFrame& ref);

// Throws ValidationError on a frame with non-finite entries.
void validate_frame(const motion::MotionFrame& ref);

numcore::Vector build_actor_obs(const PtbModel& model, const EnvState& state,
                                const motion::MotionFrame& ref);
numcore::Vector build_critic_obs(const PtbModel& model, const EnvState& state,
                                 const motion::MotionFrame& ref);

enum class Termination { None, Fall, TrackingFailure, Tipped, GlobalDrift };
enum class EvalMode { Train, Eval2m, Eval1p5m };

inline constexpr int kNumTerminationKinds = 5;
std::string termination_name(Termination t);
EvalMode parse_eval_mode(const std::string& s);
std::string eval_mode_name(EvalMode m);

inline constexpr double kHeightTolerance = 0.25;
inline constexpr double kOrientTolerance = 0.8;

// Strict inequalities throughout. Orientation is checked in train mode only;
// head height in train and eval_2m; root drift at 2.0 m (eval_2m) or 1.5 m
// (eval_1p5m).
Termination check_termination(const PtbModel& model, const EnvState& state,
                              const motion::MotionFrame& ref, EvalMode mode);

struct DomainRandCfg {
  bool joint_offset = true;
  bool com_offset = true;
  bool push = true;
  double joint_offset_range = 0.01;  // rad
  double com_offset_range = 0.025;   // m
  double push_vel = 0.5;             // m/s hip-velocity equivalent
  double push_interval_min = 1.0;    // s
  double push_interval_max = 3.0;

  void validate() const;
};

// Default-joint offsets and link-2 CoM offset drawn from their ranges.
PtbModel apply_domain_rand(const PtbModel& model, const DomainRandCfg& cfg, numcore::Prng& rng);

// Time until the next push, U[push_interval_min, push_interval_max].
double next_push_delay(const DomainRandCfg& cfg, numcore::Prng& rng);

// Joint-velocity change that moves the hip horizontally by dv while leaving
// the torso orientation unchanged: dq1 = -dv / (l1 cos q1), dq2 = -dq1.
Vec2 push_to_joint_velocity(const PtbModel& model, const Vec2& q, double dv);

// State at the given reference frame; joint positions get an extra
// U[-joint_offset_range, joint_offset_range] offset when enabled.
EnvState reset_to_frame(const motion::MotionClip& clip, std::size_t frame, numcore::Prng& rng,
                        const DomainRandCfg& cfg);

}  // namespace fastwbc::env
