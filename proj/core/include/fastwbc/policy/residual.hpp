#pragma once

#include "fastwbc/numcore/mlp.hpp"
#include "fastwbc/policy/gaussian_head.hpp"
#include "fastwbc/policy/moe.hpp"

#include <vector>

namespace fastwbc::policy {

inline constexpr double kDefaultParsevalScale = 2.0;

// Additive correction network: same observation as the base actor, output
// in action space.
struct ResidualPolicy {
  numcore::MlpNet net;
  double parseval_scale = kDefaultParsevalScale;

  // Hidden layers orthogonal with gain sqrt(2); final layer gain `final_gain`
  // so the residual starts near zero.
  static ResidualPolicy create(std::size_t obs_dim, std::size_t act_dim,
                               const std::vector<std::size_t>& hidden, numcore::Prng& rng,
                               double final_gain = 0.01, double parseval_scale = kDefaultParsevalScale);
};

// a = a_base + a_residual, with the base frozen and the head shared.
struct CompositePolicy {
  MoeNet base;
  ResidualPolicy residual;
  GaussianHead head;
};

Vector residual_mean(const ResidualPolicy& residual, const Vector& obs);
Vector composite_mean(const CompositePolicy& p, const Vector& obs);

}  // namespace fastwbc::policy
