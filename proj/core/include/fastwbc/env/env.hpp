#pragma once

#include "fastwbc/env/state.hpp"
#include "fastwbc/motion/clip.hpp"
#include "fastwbc/numcore/prng.hpp"
#include "fastwbc/reward/reward.hpp"

#include <array>
#include <cstdint>

namespace fastwbc::env {

struct EnvConfig {
  PtbModel model;
  DomainRandCfg dr;
  reward::RewardWeights weights;
  reward::AdaptiveWeightCfg adaptive;
  reward::RewardFlags flags;
  EvalMode mode = EvalMode::Train;
};

struct StepResult {
  reward::RewardTerms terms;
  double w_track = 1.0;
  double reward = 0.0;
  Termination termination = Termination::None;
  bool done = false;
  bool success = false;  // final reference frame reached without termination
};

// One control step: action -> PD target -> 10 physics substeps, then the
// cursor advances one frame and rewards/termination are evaluated against it.
StepResult env_step(EnvState& state, const Vec2& action, const motion::MotionClip& clip,
                    const PtbModel& model, const EnvConfig& cfg);

// Everything needed to resume an episode bit-exactly.
struct EnvSnapshot {
  PtbModel model;
  EnvState state;
  std::uint64_t rng_state = 0;
  double next_push = 0.0;
};

// Single balancer instance with domain randomization and a push schedule.
// The clip passed to reset must outlive the episode.
class BalancerEnv {
 public:
  BalancerEnv(EnvConfig cfg, std::uint64_t seed);

  void reset(const motion::MotionClip& clip, std::size_t start_frame);
  StepResult step(const Vec2& action);

  // Observations against the frame the next action should reach.
  numcore::Vector actor_obs() const;
  numcore::Vector critic_obs() const;

  const EnvState& state() const { return state_; }
  const PtbModel& model() const { return model_; }
  const EnvConfig& config() const { return cfg_; }
  const motion::MotionClip& clip() const { return *clip_; }
  const motion::MotionFrame& target_frame() const;
  numcore::Prng& rng() { return rng_; }

  EnvSnapshot snapshot() const;
  void restore(const EnvSnapshot& snap, const motion::MotionClip& clip);

 private:
  EnvConfig cfg_;
  PtbModel model_;
  numcore::Prng rng_;
  EnvState state_;
  const motion::MotionClip* clip_ = nullptr;
  double next_push_ = 0.0;
};

}  // namespace fastwbc::env
