#pragma once

#include "fastwbc/numcore/linalg.hpp"

#include <functional>

namespace fastwbc::numcore {

using ScalarFn = std::function<double(const Vector&)>;

// Central-difference gradient (f(x + h e_i) - f(x - h e_i)) / 2h.
Vector numeric_gradient(const ScalarFn& f, const Vector& x, double h);

// Max over components of |a_i - n_i| / max(|a_i|, |n_i|, floor), where
// floor = 1e-6 * max(1, ||a||_inf) keeps structurally tiny components from
// dominating. Returns +inf when f produced a non-finite value.
double relative_error(const Vector& analytic, const Vector& numeric);

// Compares `analytic` (the gradient of f at x) with central differences.
// h must lie in [1e-7, 1e-3].
double grad_check(const ScalarFn& f, const Vector& analytic, const Vector& x, double h);

}  // namespace fastwbc::numcore
