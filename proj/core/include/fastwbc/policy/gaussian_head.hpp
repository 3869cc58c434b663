#pragma once

#include "fastwbc/numcore/linalg.hpp"
#include "fastwbc/numcore/prng.hpp"

#include <utility>

namespace fastwbc::policy {

using numcore::Matrix;
using numcore::Vector;

// Diagonal Gaussian action head with a state-independent log standard
// deviation. Shared by the base and the composite policy, so the covariance
// is diag(exp(2 * log_std)) for both.
struct GaussianHead {
  Vector log_std;

  std::size_t dim() const { return static_cast<std::size_t>(log_std.size()); }
  Vector stddev() const { return log_std.array().exp(); }
  Vector variance() const { return (2.0 * log_std.array()).exp(); }
  double max_variance() const { return variance().maxCoeff(); }
};

// Exact diagonal-Gaussian log density of `action` under N(mean, Sigma).
double log_prob(const Vector& mean, const GaussianHead& head, const Vector& action);

// Batched: one log density per column.
Vector log_prob(const Matrix& mean, const GaussianHead& head, const Matrix& actions);

// Draws a ~ N(mean, Sigma) and returns it with its log density.
std::pair<Vector, double> sample_and_logprob(const Vector& mean, const GaussianHead& head,
                                             numcore::Prng& rng);

// sum_i (log_std_i + 0.5 ln(2 pi e))
double entropy(const GaussianHead& head);

}  // namespace fastwbc::policy
