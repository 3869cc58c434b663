#include "fastwbc/policy/moe.hpp"

#include "fastwbc/error.hpp"

#include <string>

namespace fastwbc::policy {

Matrix softmax_columns(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    const double m = logits.col(j).maxCoeff();
    out.col(j) = (logits.col(j).array() - m).exp();
    out.col(j) /= out.col(j).sum();
  }
  return out;
}

void MoeGrads::set_zero() {
  gating.set_zero();
  for (auto& g : experts) g.set_zero();
}

void MoeGrads::append_views(numcore::ParamList& out) {
  for (auto& g : experts) numcore::append_views(g, out);
  numcore::append_views(gating, out);
}

MoeNet MoeNet::create(std::size_t input_dim, std::size_t output_dim,
                      const std::vector<std::size_t>& hidden, std::size_t num_experts,
                      numcore::Prng& rng, double final_gain) {
  if (num_experts == 0) throw ValidationError("MoeNet: need at least one expert");
  std::vector<std::size_t> dims{input_dim};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(output_dim);
  MoeNet net;
  for (std::size_t e = 0; e < num_experts; ++e) {
    net.experts.push_back(numcore::MlpNet::orthogonal(dims, rng, final_gain));
  }
  const std::size_t gate_hidden = (input_dim + 1) / 2;
  const std::vector<std::size_t> gate_dims{input_dim, gate_hidden, num_experts};
  net.gating = numcore::MlpNet::orthogonal(gate_dims, rng, 0.01);
  return net;
}

Matrix MoeNet::gate(const Matrix& x) const {
  return softmax_columns(numcore::mlp_forward(gating, x));
}

Matrix MoeNet::forward(const Matrix& x, MoeCache* cache) const {
  if (static_cast<std::size_t>(x.rows()) != input_dim()) {
    throw ValidationError("MoeNet: observation has " + std::to_string(x.rows()) +
                          " entries, expected " + std::to_string(input_dim()));
  }
  const std::size_t n = experts.size();
  Matrix weights = softmax_columns(numcore::mlp_forward(gating, x, cache ? &cache->gating : nullptr));
  Matrix y = Matrix::Zero(static_cast<Eigen::Index>(output_dim()), x.cols());
  if (cache) {
    cache->experts.resize(n);
    cache->expert_out.resize(n);
  }
  for (std::size_t e = 0; e < n; ++e) {
    Matrix out = numcore::mlp_forward(experts[e], x, cache ? &cache->experts[e] : nullptr);
    y.array() += out.array().rowwise() * weights.row(static_cast<Eigen::Index>(e)).array();
    if (cache) cache->expert_out[e] = std::move(out);
  }
  if (cache) cache->weights = std::move(weights);
  return y;
}

Matrix MoeNet::backward(const MoeCache& cache, const Matrix& dy, MoeGrads& grads) const {
  const std::size_t n = experts.size();
  if (cache.experts.size() != n || cache.expert_out.size() != n) {
    throw ValidationError("MoeNet::backward: cache does not match network");
  }
  if (grads.experts.size() != n) grads = zero_grads();
  // d weight_e = <dy, out_e>; softmax backward: dz = g * (dg - sum g dg).
  Matrix dgate(static_cast<Eigen::Index>(n), dy.cols());
  Matrix dx = Matrix::Zero(cache.gating.input.rows(), dy.cols());
  for (std::size_t e = 0; e < n; ++e) {
    const auto row = static_cast<Eigen::Index>(e);
    dgate.row(row) = cache.expert_out[e].cwiseProduct(dy).colwise().sum();
    const Matrix dout = (dy.array().rowwise() * cache.weights.row(row).array()).matrix();
    dx += numcore::mlp_backward(experts[e], cache.experts[e], dout, grads.experts[e]);
  }
  const Eigen::RowVectorXd inner = cache.weights.cwiseProduct(dgate).colwise().sum();
  const Matrix dlogits = cache.weights.cwiseProduct(dgate - inner.replicate(dgate.rows(), 1));
  dx += numcore::mlp_backward(gating, cache.gating, dlogits, grads.gating);
  return dx;
}

MoeGrads MoeNet::zero_grads() const {
  MoeGrads g;
  for (const auto& e : experts) g.experts.push_back(numcore::MlpGrads::zeros_like(e));
  g.gating = numcore::MlpGrads::zeros_like(gating);
  return g;
}

void MoeNet::append_views(numcore::ParamList& out) {
  for (auto& e : experts) numcore::append_views(e, out);
  numcore::append_views(gating, out);
}

bool MoeNet::operator==(const MoeNet& other) const {
  return experts == other.experts && gating == other.gating;
}

Vector moe_mean(const MoeNet& net, const Vector& obs) {
  return net.forward(Matrix(obs)).col(0);
}

}  // namespace fastwbc::policy
