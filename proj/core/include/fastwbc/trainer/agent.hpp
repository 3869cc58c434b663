#pragma once

#include "fastwbc/config/run_config.hpp"
#include "fastwbc/numcore/linalg.hpp"
#include "fastwbc/numcore/prng.hpp"
#include "fastwbc/policy/gaussian_head.hpp"
#include "fastwbc/policy/moe.hpp"
#include "fastwbc/policy/residual.hpp"

#include <optional>
#include <string>

namespace fastwbc::trainer {

using numcore::Matrix;
using numcore::Vector;

// Running mean / variance of observations (parallel-merge update).
struct RunningNorm {
  Vector mean;
  Vector var;
  double count = 1e-4;

  static RunningNorm identity(std::size_t dim);
  std::size_t dim() const { return static_cast<std::size_t>(mean.size()); }
  // Merges the statistics of a batch (one sample per column).
  void update(const Matrix& batch);
  Matrix normalize(const Matrix& x) const;
  bool operator==(const RunningNorm& o) const;
};

enum class Stage { Base, ResidualAdapt };
std::string stage_name(Stage s);
Stage parse_stage(const std::string& s);

// Actor, critic, shared Gaussian head, optional residual and the observation
// normalizers. Networks consume normalized observations.
struct Agent {
  policy::MoeNet actor;
  policy::MoeNet critic;
  policy::GaussianHead head;
  std::optional<policy::ResidualPolicy> residual;
  RunningNorm actor_norm;
  RunningNorm critic_norm;
  bool obs_norm = true;

  static Agent create(const config::ArchConfig& arch, std::size_t actor_dim,
                      std::size_t critic_dim, std::size_t act_dim, numcore::Prng& rng,
                      bool obs_norm = true);
  void add_residual(const config::ArchConfig& arch, double final_gain, double parseval_s,
                    numcore::Prng& rng);

  Stage stage() const { return residual ? Stage::ResidualAdapt : Stage::Base; }

  Matrix normalize_actor(const Matrix& raw) const;
  Matrix normalize_critic(const Matrix& raw) const;

  // Means and values from already-normalized observations.
  Matrix base_mean(const Matrix& obs) const;
  Matrix residual_mean(const Matrix& obs) const;  // zero without a residual
  Matrix mean(const Matrix& obs) const;           // base + residual
  Vector value(const Matrix& critic_obs) const;
};

}  // namespace fastwbc::trainer
