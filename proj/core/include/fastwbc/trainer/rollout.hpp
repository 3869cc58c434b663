#pragma once

#include "fastwbc/env/state.hpp"
#include "fastwbc/numcore/linalg.hpp"

#include <cstddef>
#include <vector>

namespace fastwbc::trainer {

using numcore::Matrix;
using numcore::Vector;

// Transitions of n_envs environments over T steps; transition (t, e) lives in
// column t * n_envs + e. Observations are stored normalized, as the policy
// saw them.
struct RolloutBuffer {
  std::size_t n_envs = 0;
  std::size_t steps = 0;
  Matrix actor_obs;
  Matrix critic_obs;
  Matrix actions;
  Matrix old_mean;
  Vector old_log_std;  // head at collection time
  Vector logp;
  Vector rewards;
  Vector values;
  std::vector<char> dones;  // episode ended after this transition
  std::vector<env::Termination> kinds;
  std::vector<std::size_t> clip_ids;
  std::vector<std::size_t> segment_ids;
  Vector last_values;  // bootstrap V(s_T) per env
  Vector advantages;
  Vector returns;

  RolloutBuffer() = default;
  RolloutBuffer(std::size_t n_envs, std::size_t steps, std::size_t actor_dim,
                std::size_t critic_dim, std::size_t act_dim);
  std::size_t capacity() const { return n_envs * steps; }
  std::size_t index(std::size_t t, std::size_t e) const { return t * n_envs + e; }
};

// A_t = delta_t + gamma lam (1 - done_t) A_{t+1}, delta_t = r_t + gamma (1 -
// done_t) V_{t+1} - V_t; returns = advantages + values.
void compute_gae(RolloutBuffer& buf, double gamma, double lam);

// Zero mean, unit std (population std, floored at 1e-8).
void normalize_advantages(RolloutBuffer& buf);

}  // namespace fastwbc::trainer
