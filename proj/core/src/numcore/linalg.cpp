#include "fastwbc/numcore/linalg.hpp"

#include "fastwbc/error.hpp"
#include "fastwbc/numcore/prng.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fastwbc::numcore {

bool all_finite(const Matrix& m) { return m.allFinite(); }

void require_finite(const Matrix& m, std::string_view what) {
  if (!m.allFinite()) {
    throw ValidationError(std::string(what) + ": non-finite entry");
  }
}

namespace {

bool is_diagonal(const Matrix& a) {
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      if (i != j && a(i, j) != 0.0) return false;
    }
  }
  return true;
}

}  // namespace

double spectral_norm_sym(const Matrix& a, double tol, int max_iters) {
  if (a.rows() != a.cols()) {
    throw ValidationError("spectral_norm_sym: matrix is " + std::to_string(a.rows()) + "x" +
                          std::to_string(a.cols()) + ", expected square");
  }
  if (!(tol > 0.0)) throw ValidationError("spectral_norm_sym: tol must be positive");
  const double scale = a.cwiseAbs().maxCoeff();
  if (a.size() == 0 || scale == 0.0) return 0.0;
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ValidationError("spectral_norm_sym: matrix is not symmetric");
  }
  if (is_diagonal(a)) return a.diagonal().cwiseAbs().maxCoeff();

  Prng rng(tags::kPower);
  Vector v(a.rows());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.normal();
  v.normalize();

  // ||A v|| converges to |lambda_max| even when +/-lambda share the top magnitude.
  double estimate = 0.0;
  Vector w(v.size());
  for (int it = 0; it < max_iters; ++it) {
    w.noalias() = a * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    const bool converged = std::abs(norm - estimate) <= tol * std::max(1.0, norm);
    estimate = norm;
    v = w / norm;
    if (converged) break;
  }
  return estimate;
}

double spectral_norm(const Matrix& w, double tol, int max_iters) {
  if (w.size() == 0) return 0.0;
  const Matrix gram = w.rows() < w.cols() ? Matrix(w * w.transpose())
                                          : Matrix(w.transpose() * w);
  // Symmetrize away rounding so the symmetry check holds.
  const Matrix sym = 0.5 * (gram + gram.transpose());
  return std::sqrt(spectral_norm_sym(sym, tol, max_iters));
}

}  // namespace fastwbc::numcore
