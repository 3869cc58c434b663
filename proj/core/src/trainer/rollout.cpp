#include "fastwbc/trainer/rollout.hpp"

#include "fastwbc/error.hpp"

#include <cmath>

namespace fastwbc::trainer {

RolloutBuffer::RolloutBuffer(std::size_t n, std::size_t t, std::size_t actor_dim,
                             std::size_t critic_dim, std::size_t act_dim)
    : n_envs(n), steps(t) {
  const auto cap = static_cast<Eigen::Index>(n * t);
  actor_obs = Matrix::Zero(static_cast<Eigen::Index>(actor_dim), cap);
  critic_obs = Matrix::Zero(static_cast<Eigen::Index>(critic_dim), cap);
  actions = Matrix::Zero(static_cast<Eigen::Index>(act_dim), cap);
  old_mean = Matrix::Zero(static_cast<Eigen::Index>(act_dim), cap);
  old_log_std = Vector::Zero(static_cast<Eigen::Index>(act_dim));
  logp = Vector::Zero(cap);
  rewards = Vector::Zero(cap);
  values = Vector::Zero(cap);
  dones.assign(n * t, 0);
  kinds.assign(n * t, env::Termination::None);
  clip_ids.assign(n * t, 0);
  segment_ids.assign(n * t, 0);
  last_values = Vector::Zero(static_cast<Eigen::Index>(n));
  advantages = Vector::Zero(cap);
  returns = Vector::Zero(cap);
}

void compute_gae(RolloutBuffer& buf, double gamma, double lam) {
  if (static_cast<std::size_t>(buf.values.size()) != buf.capacity() ||
      static_cast<std::size_t>(buf.last_values.size()) != buf.n_envs) {
    throw ValidationError("compute_gae: buffer is not populated");
  }
  for (std::size_t e = 0; e < buf.n_envs; ++e) {
    double next_adv = 0.0;
    double next_value = buf.last_values(static_cast<Eigen::Index>(e));
    for (std::size_t t = buf.steps; t-- > 0;) {
      const auto i = static_cast<Eigen::Index>(buf.index(t, e));
      const double live = buf.dones[static_cast<std::size_t>(i)] ? 0.0 : 1.0;
      const double delta = buf.rewards(i) + gamma * live * next_value - buf.values(i);
      next_adv = delta + gamma * lam * live * next_adv;
      buf.advantages(i) = next_adv;
      next_value = buf.values(i);
    }
  }
  buf.returns = buf.advantages + buf.values;
}

void normalize_advantages(RolloutBuffer& buf) {
  const double mean = buf.advantages.mean();
  const double var = (buf.advantages.array() - mean).square().mean();
  buf.advantages = (buf.advantages.array() - mean) / std::max(std::sqrt(var), 1e-8);
}

}  // namespace fastwbc::trainer
