#include "fastwbc/policy/gaussian_head.hpp"

#include "fastwbc/error.hpp"

#include <cmath>
#include <numbers>

namespace fastwbc::policy {

namespace {
const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);
}

double log_prob(const Vector& mean, const GaussianHead& head, const Vector& action) {
  if (mean.size() != head.log_std.size() || action.size() != mean.size()) {
    throw ValidationError("log_prob: dimension mismatch");
  }
  double lp = 0.0;
  for (Eigen::Index i = 0; i < mean.size(); ++i) {
    const double z = (action(i) - mean(i)) * std::exp(-head.log_std(i));
    lp += -0.5 * z * z - head.log_std(i) - kHalfLog2Pi;
  }
  return lp;
}

Vector log_prob(const Matrix& mean, const GaussianHead& head, const Matrix& actions) {
  if (mean.rows() != head.log_std.size() || actions.rows() != mean.rows() ||
      actions.cols() != mean.cols()) {
    throw ValidationError("log_prob: dimension mismatch");
  }
  const Vector inv_std = (-head.log_std.array()).exp();
  const double norm = head.log_std.sum() + kHalfLog2Pi * static_cast<double>(mean.rows());
  const Matrix z = (actions - mean).array().colwise() * inv_std.array();
  return (-0.5 * z.colwise().squaredNorm().array() - norm).matrix().transpose();
}

std::pair<Vector, double> sample_and_logprob(const Vector& mean, const GaussianHead& head,
                                             numcore::Prng& rng) {
  if (mean.size() != head.log_std.size()) throw ValidationError("sample_and_logprob: dimension mismatch");
  Vector a(mean.size());
  double lp = 0.0;
  for (Eigen::Index i = 0; i < mean.size(); ++i) {
    const double eps = rng.normal();
    a(i) = mean(i) + std::exp(head.log_std(i)) * eps;
    lp += -0.5 * eps * eps - head.log_std(i) - kHalfLog2Pi;
  }
  return {a, lp};
}

double entropy(const GaussianHead& head) {
  const double per_dim = 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e);
  return head.log_std.sum() + per_dim * static_cast<double>(head.log_std.size());
}

}  // namespace fastwbc::policy
