#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string_view>

namespace fastwbc::numcore {

// Dense 64-bit storage. Batched quantities keep one sample per column.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kSpectralTol = 1e-10;
inline constexpr int kSpectralMaxIters = 5000;

// Throws ValidationError naming `what` if any entry is NaN or infinite.
void require_finite(const Matrix& m, std::string_view what);
bool all_finite(const Matrix& m);

// Largest |eigenvalue| of a symmetric matrix by power iteration from a
// fixed-seed start vector. Diagonal inputs are answered exactly.
double spectral_norm_sym(const Matrix& a, double tol = kSpectralTol,
                         int max_iters = kSpectralMaxIters);

// ||w||_2 via power iteration on the smaller Gram matrix of w.
double spectral_norm(const Matrix& w, double tol = kSpectralTol,
                     int max_iters = kSpectralMaxIters);

// Scalar ELU with alpha = 1 and its derivative.
inline double elu(double x) { return x > 0.0 ? x : std::expm1(x); }
inline double elu_grad(double x) { return x > 0.0 ? 1.0 : std::exp(x); }

}  // namespace fastwbc::numcore
