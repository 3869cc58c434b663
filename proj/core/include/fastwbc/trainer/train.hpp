#pragma once

#include "fastwbc/config/run_config.hpp"
#include "fastwbc/env/env.hpp"
#include "fastwbc/motion/clip.hpp"
#include "fastwbc/trainer/checkpoint.hpp"
#include "fastwbc/trainer/ppo.hpp"
#include "fastwbc/trainer/rollout.hpp"

#include <array>
#include <cstdint>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <ostream>
#include <vector>

namespace fastwbc::trainer {

struct IterationLog {
  int iteration = 0;
  Stage stage = Stage::Base;
  double mean_reward = 0;  // per transition
  int episodes = 0;        // finished during this rollout
  int successes = 0;
  std::array<int, env::kNumTerminationKinds> terminations{};
  UpdateStats update;
  bool sampler_updated = false;
  std::optional<double> succ;  // periodic train-mode snapshot, percent
  double seconds = 0;
};

nlohmann::json log_to_json(const IterationLog& l);

// On-policy loop over n_envs balancers. Episodes start at a sampled (clip,
// segment) and run to the end of the clip or a termination.
class Trainer {
 public:
  // Fresh run; the stage follows the agent (residual present -> adaptation).
  Trainer(Agent agent, const motion::MotionLibrary& lib, const config::RunConfig& cfg,
          std::uint64_t seed);
  // Continues from a checkpoint carrying runtime state.
  static Trainer resume(const Checkpoint& ckpt, const motion::MotionLibrary& lib);

  Trainer(Trainer&&) = default;
  ~Trainer();

  IterationLog iterate();
  // Throws NumericalError if the frozen base actor changed during adaptation.
  Checkpoint checkpoint() const;

  const Agent& agent() const { return agent_; }
  int iteration() const { return iteration_; }
  Stage stage() const { return stage_; }
  const SamplerState& sampler() const { return sampler_; }
  const motion::MotionLibrary& library() const { return *lib_; }
  const config::RunConfig& config() const { return cfg_; }
  std::uint64_t seed() const { return seed_; }

 private:
  struct Slot;
  Trainer(const motion::MotionLibrary& lib, const config::RunConfig& cfg, std::uint64_t seed);
  void assign(std::size_t e);
  void collect(RolloutBuffer& buf, IterationLog& log);

  const motion::MotionLibrary* lib_;
  config::RunConfig cfg_;
  std::uint64_t seed_ = 0;
  Agent agent_;
  Stage stage_ = Stage::Base;
  policy::MoeNet frozen_actor_;
  std::vector<std::unique_ptr<Slot>> slots_;
  SamplerState sampler_;
  numcore::Prng sampler_rng_;
  numcore::Prng shuffle_rng_;
  numcore::Adam adam_;
  double lr_ = 0;
  int iteration_ = 0;
};

struct TrainResult {
  Checkpoint checkpoint;  // last good state
  bool diverged = false;
  bool stopped_early = false;
};

// Fresh agent from sub_seed(seed, init); iterations = cfg.ppo.iterations.
TrainResult train_base(const motion::MotionLibrary& lib, const config::RunConfig& cfg,
                       std::uint64_t seed, std::ostream* log = nullptr);

// Adds a near-zero residual to a base checkpoint and trains it with the base
// actor frozen; the critic, normalizers and log_std are warm-started.
// Rejects checkpoints that already carry a residual.
TrainResult adapt_residual(const Checkpoint& base, const motion::MotionLibrary& lib,
                           const config::RunConfig& cfg, std::uint64_t seed,
                           std::ostream* log = nullptr);

// Runs `iterations` more iterations of an existing trainer with logging,
// periodic snapshots and early stopping.
TrainResult run_training(Trainer& trainer, int iterations, std::ostream* log);

}  // namespace fastwbc::trainer
