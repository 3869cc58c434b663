#include "fastwbc/policy/residual.hpp"

#include "fastwbc/error.hpp"

namespace fastwbc::policy {

ResidualPolicy ResidualPolicy::create(std::size_t obs_dim, std::size_t act_dim,
                                      const std::vector<std::size_t>& hidden,
                                      numcore::Prng& rng, double final_gain,
                                      double parseval_scale) {
  if (!(parseval_scale > 0.0)) throw ValidationError("ResidualPolicy: parseval_scale must be positive");
  std::vector<std::size_t> dims{obs_dim};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(act_dim);
  ResidualPolicy r;
  r.net = numcore::MlpNet::orthogonal(dims, rng, final_gain);
  // Hidden layers start at W^T W = sI when s matches the sqrt(2) gain.
  r.parseval_scale = parseval_scale;
  return r;
}

Vector residual_mean(const ResidualPolicy& residual, const Vector& obs) {
  return numcore::mlp_forward(residual.net, obs);
}

Vector composite_mean(const CompositePolicy& p, const Vector& obs) {
  const Vector base = moe_mean(p.base, obs);
  const Vector delta = residual_mean(p.residual, obs);
  if (base.size() != delta.size()) throw ValidationError("composite_mean: action dims differ");
  return base + delta;
}

}  // namespace fastwbc::policy
