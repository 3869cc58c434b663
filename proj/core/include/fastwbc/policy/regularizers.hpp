#pragma once

#include "fastwbc/numcore/prng.hpp"
#include "fastwbc/policy/gaussian_head.hpp"
#include "fastwbc/policy/residual.hpp"

#include <vector>

namespace fastwbc::policy {

// Gram matrix over the smaller dimension of W: W^T W when W has at least as
// many rows as columns, W W^T otherwise. Square layers use W^T W. A narrowing
// layer cannot have W^T W = sI, so its orthonormality is measured on rows.
Matrix parseval_gram(const Matrix& w);

// ||G - sI||_F^2 with G = parseval_gram(W).
double layer_parseval_loss(const Matrix& w, double s);
// Exact gradient: 4 W (W^T W - sI), or 4 (W W^T - sI) W for narrowing layers.
Matrix layer_parseval_grad(const Matrix& w, double s);
// eps = ||G - sI||_2 via spectral_norm_sym.
double layer_parseval_defect(const Matrix& w, double s);

// Sum over all but the final layer.
double parseval_loss(const ResidualPolicy& net);
// One entry per layer; the final layer's entry is zero.
std::vector<Matrix> parseval_grad(const ResidualPolicy& net);

// KL(N(mu, Sigma) || N(mu_b, Sigma)) = 0.5 sum_i (mu_i - mu_b,i)^2 / sigma_i^2.
double kl_shared_cov(const Vector& mu_composite, const Vector& mu_base, const GaussianHead& head);

// prod_{l<L} sqrt(s + eps_l) * ||W_L||_2.
double lipschitz_bound(const ResidualPolicy& net);

// sqrt(2 * kl * lambda_max(Sigma)); throws on negative kl.
double residual_norm_bound(double kl, const GaussianHead& head);

// max ||f(x) - f(y)|| / ||x - y|| over n_pairs pairs with x, y ~ N(0, radius^2 I).
double empirical_lipschitz(const numcore::MlpNet& net, int n_pairs, double radius,
                           numcore::Prng& rng);

}  // namespace fastwbc::policy
