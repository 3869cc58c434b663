#pragma once

#include "fastwbc/config/run_config.hpp"
#include "fastwbc/env/state.hpp"
#include "fastwbc/motion/clip.hpp"
#include "fastwbc/motion/generators.hpp"
#include "fastwbc/numcore/grad_check.hpp"
#include "fastwbc/numcore/params.hpp"
#include "fastwbc/numcore/prng.hpp"
#include "fastwbc/policy/gaussian_head.hpp"
#include "fastwbc/trainer/agent.hpp"
#include "fastwbc/trainer/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>

namespace fastwbc::testkit {

using trainer::Matrix;
using trainer::Vector;

inline config::ArchConfig small_arch() {
  config::ArchConfig a;
  a.hidden = {8, 8};
  a.experts = 2;
  a.residual_hidden = {8, 6};
  return a;
}

// Few envs and short rollouts so a training iteration takes milliseconds.
inline config::RunConfig small_run_config() {
  config::RunConfig c;
  c.arch = small_arch();
  c.ppo.n_envs = 6;
  c.ppo.steps_per_env = 8;
  c.ppo.epochs = 2;
  c.ppo.minibatches = 2;
  c.ppo.iterations = 3;
  c.adapt.iterations = 3;
  c.sampler.update_interval = 2;
  c.eval.snapshot_interval = 0;
  return c;
}

inline trainer::Agent small_agent(std::uint64_t seed, bool residual, double final_gain = 0.5) {
  numcore::Prng rng(seed);
  config::ArchConfig arch = small_arch();
  arch.final_gain = final_gain;
  arch.init_log_std = -0.3;
  trainer::Agent a = trainer::Agent::create(arch, env::kActorObsDim, env::kCriticObsDim, 2, rng);
  if (residual) a.add_residual(arch, final_gain, 2.0, rng);
  // Unequal standard deviations exercise the per-dimension terms.
  a.head.log_std(1) = 0.2;
  return a;
}

// Random minibatch whose old probabilities sit within a factor 1 +- spread of
// the current policy's; the default keeps every ratio inside the clip range.
inline trainer::Batch random_batch(const trainer::Agent& agent, std::size_t n, numcore::Prng& rng,
                                   bool zero_advantages = false, double spread = 0.1) {
  trainer::Batch b;
  const auto cols = static_cast<Eigen::Index>(n);
  b.obs.resize(static_cast<Eigen::Index>(env::kActorObsDim), cols);
  b.critic_obs.resize(static_cast<Eigen::Index>(env::kCriticObsDim), cols);
  for (Eigen::Index i = 0; i < b.obs.size(); ++i) b.obs.data()[i] = rng.normal();
  for (Eigen::Index i = 0; i < b.critic_obs.size(); ++i) b.critic_obs.data()[i] = rng.normal();
  b.old_mean = agent.mean(b.obs);
  b.old_log_std = agent.head.log_std;
  b.actions = b.old_mean;
  const Vector sd = agent.head.stddev();
  for (Eigen::Index k = 0; k < cols; ++k) {
    for (Eigen::Index j = 0; j < b.actions.rows(); ++j) b.actions(j, k) += sd(j) * rng.normal();
  }
  b.old_logp = policy::log_prob(b.old_mean, agent.head, b.actions);
  for (Eigen::Index k = 0; k < cols; ++k) b.old_logp(k) += std::log(rng.uniform(1.0 - spread, 1.0 + spread));
  b.advantages.resize(cols);
  b.returns.resize(cols);
  for (Eigen::Index k = 0; k < cols; ++k) {
    b.advantages(k) = zero_advantages ? 0.0 : rng.normal();
    b.returns(k) = rng.normal();
  }
  return b;
}

// Central differences at h and h/2 combined by Richardson extrapolation,
// which cancels the h^2 truncation term. Losses with quartic Parseval terms
// have enough curvature that a plain step is either truncation or round-off
// limited on the smallest gradient components.
inline Vector richardson_gradient(const numcore::ScalarFn& f, const Vector& x, double h) {
  return (4.0 * numcore::numeric_gradient(f, x, 0.5 * h) - numcore::numeric_gradient(f, x, h)) / 3.0;
}

struct GradCheck {
  double error = 0;            // analytic gradient vs the oracle
  double corrupted_error = 0;  // analytic gradient scaled by 1 + 1e-4
};

// Relative error between the analytic gradient of ppo_loss and central
// differences over every trainable parameter of the stage. The oracle's own
// error is truncation at large h and round-off at small h, with the crossover
// set by the loss scale; a wrong analytic gradient stays wrong at every step,
// so the best step of a fixed sweep is reported.
inline GradCheck ppo_grad_check(const trainer::Agent& agent, const trainer::Batch& batch,
                                const config::PpoConfig& cfg, trainer::Stage stage) {
  trainer::AgentGrads g = trainer::AgentGrads::zeros_like(agent);
  trainer::ppo_loss(agent, batch, cfg, stage, &g);
  const Vector analytic = numcore::flatten(trainer::trainable_grads(g, stage));
  const Vector corrupted = (1.0 + 1e-4) * analytic;

  trainer::Agent probe = agent;
  const numcore::ParamList views = trainer::trainable_params(probe, stage);
  const Vector x0 = numcore::flatten(views);
  const numcore::ScalarFn f = [&](const Vector& x) {
    numcore::unflatten(x, views);
    return trainer::ppo_loss(probe, batch, cfg, stage, nullptr).total;
  };
  GradCheck out{HUGE_VAL, HUGE_VAL};
  for (double h : {3e-5, 1e-4, 3e-4, 1e-3}) {
    const Vector numeric = richardson_gradient(f, x0, h);
    out.error = std::min(out.error, numcore::relative_error(analytic, numeric));
    out.corrupted_error = std::min(out.corrupted_error, numcore::relative_error(corrupted, numeric));
  }
  numcore::unflatten(x0, views);
  return out;
}

inline double ppo_grad_error(const trainer::Agent& agent, const trainer::Batch& batch,
                             const config::PpoConfig& cfg, trainer::Stage stage) {
  return ppo_grad_check(agent, batch, cfg, stage).error;
}

inline motion::MotionLibrary source_library(std::uint64_t seed = 1) {
  motion::MotionLibrary lib;
  lib.clips = motion::make_preset(motion::Preset::Source, seed);
  return lib;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("fastwbc_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace fastwbc::testkit
