#include "fastwbc/policy/regularizers.hpp"

#include "fastwbc/error.hpp"
#include "fastwbc/numcore/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace fastwbc::policy {

namespace {

bool narrowing(const Matrix& w) { return w.rows() < w.cols(); }

Matrix defect_matrix(const Matrix& w, double s) {
  Matrix g = parseval_gram(w);
  g.diagonal().array() -= s;
  return g;
}

}  // namespace

Matrix parseval_gram(const Matrix& w) {
  Matrix g = narrowing(w) ? Matrix(w * w.transpose()) : Matrix(w.transpose() * w);
  return 0.5 * (g + g.transpose());
}

double layer_parseval_loss(const Matrix& w, double s) {
  return defect_matrix(w, s).squaredNorm();
}

Matrix layer_parseval_grad(const Matrix& w, double s) {
  const Matrix d = defect_matrix(w, s);
  return narrowing(w) ? Matrix(4.0 * d * w) : Matrix(4.0 * w * d);
}

double layer_parseval_defect(const Matrix& w, double s) {
  return numcore::spectral_norm_sym(defect_matrix(w, s));
}

double parseval_loss(const ResidualPolicy& net) {
  if (!(net.parseval_scale > 0.0)) throw ValidationError("parseval_loss: s must be positive");
  double total = 0.0;
  for (std::size_t l = 0; l + 1 < net.net.num_layers(); ++l) {
    total += layer_parseval_loss(net.net.weights[l], net.parseval_scale);
  }
  return total;
}

std::vector<Matrix> parseval_grad(const ResidualPolicy& net) {
  std::vector<Matrix> out;
  const std::size_t n = net.net.num_layers();
  for (std::size_t l = 0; l < n; ++l) {
    const Matrix& w = net.net.weights[l];
    out.push_back(l + 1 < n ? layer_parseval_grad(w, net.parseval_scale)
                            : Matrix(Matrix::Zero(w.rows(), w.cols())));
  }
  return out;
}

double kl_shared_cov(const Vector& mu_composite, const Vector& mu_base, const GaussianHead& head) {
  if (mu_composite.size() != mu_base.size() || mu_base.size() != head.log_std.size()) {
    throw ValidationError("kl_shared_cov: dimension mismatch");
  }
  const Vector diff = mu_composite - mu_base;
  return 0.5 * (diff.array().square() / head.variance().array()).sum();
}

double lipschitz_bound(const ResidualPolicy& net) {
  const std::size_t n = net.net.num_layers();
  if (n == 0) return 0.0;
  double bound = numcore::spectral_norm(net.net.weights[n - 1]);
  for (std::size_t l = 0; l + 1 < n; ++l) {
    const double eps = layer_parseval_defect(net.net.weights[l], net.parseval_scale);
    bound *= std::sqrt(net.parseval_scale + eps);
  }
  return bound;
}

double residual_norm_bound(double kl, const GaussianHead& head) {
  if (kl < 0.0) throw ValidationError("residual_norm_bound: kl must be non-negative");
  return std::sqrt(2.0 * kl * head.max_variance());
}

double empirical_lipschitz(const numcore::MlpNet& net, int n_pairs, double radius,
                           numcore::Prng& rng) {
  const auto dim = static_cast<Eigen::Index>(net.input_dim());
  Matrix xs(dim, n_pairs), ys(dim, n_pairs);
  for (int k = 0; k < n_pairs; ++k) {
    for (Eigen::Index i = 0; i < dim; ++i) xs(i, k) = radius * rng.normal();
    for (Eigen::Index i = 0; i < dim; ++i) ys(i, k) = radius * rng.normal();
  }
  const Matrix fx = numcore::mlp_forward(net, xs);
  const Matrix fy = numcore::mlp_forward(net, ys);
  double best = 0.0;
  for (int k = 0; k < n_pairs; ++k) {
    const double dx = (xs.col(k) - ys.col(k)).norm();
    if (dx == 0.0) continue;
    best = std::max(best, (fx.col(k) - fy.col(k)).norm() / dx);
  }
  return best;
}

}  // namespace fastwbc::policy
