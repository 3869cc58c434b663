#include "fastwbc/numcore/grad_check.hpp"

#include "fastwbc/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fastwbc::numcore {

Vector numeric_gradient(const ScalarFn& f, const Vector& x, double h) {
  Vector g(x.size());
  Vector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe(i) = x(i) + h;
    const double fp = f(probe);
    probe(i) = x(i) - h;
    const double fm = f(probe);
    probe(i) = x(i);
    g(i) = (fp - fm) / (2.0 * h);
  }
  return g;
}

double relative_error(const Vector& analytic, const Vector& numeric) {
  if (analytic.size() != numeric.size()) throw ValidationError("relative_error: size mismatch");
  if (!analytic.allFinite() || !numeric.allFinite()) {
    return std::numeric_limits<double>::infinity();
  }
  if (analytic.size() == 0) return 0.0;
  const double floor = 1e-6 * std::max(1.0, analytic.cwiseAbs().maxCoeff());
  double worst = 0.0;
  for (Eigen::Index i = 0; i < analytic.size(); ++i) {
    const double a = analytic(i);
    const double n = numeric(i);
    const double denom = std::max({std::abs(a), std::abs(n), floor});
    worst = std::max(worst, std::abs(a - n) / denom);
  }
  return worst;
}

double grad_check(const ScalarFn& f, const Vector& analytic, const Vector& x, double h) {
  if (!(h >= 1e-7 && h <= 1e-3)) throw ValidationError("grad_check: h must lie in [1e-7, 1e-3]");
  if (analytic.size() != x.size()) throw ValidationError("grad_check: gradient size mismatch");
  if (!std::isfinite(f(x))) return std::numeric_limits<double>::infinity();
  return relative_error(analytic, numeric_gradient(f, x, h));
}

}  // namespace fastwbc::numcore
