#pragma once

#include "fastwbc/numcore/mlp.hpp"
#include "fastwbc/numcore/params.hpp"
#include "fastwbc/policy/gaussian_head.hpp"

#include <cstddef>
#include <vector>

namespace fastwbc::policy {

struct MoeCache {
  numcore::MlpCache gating;
  Matrix weights;  // experts x batch, softmax of gating logits
  std::vector<numcore::MlpCache> experts;
  std::vector<Matrix> expert_out;
};

struct MoeGrads {
  numcore::MlpGrads gating;
  std::vector<numcore::MlpGrads> experts;

  void set_zero();
  void append_views(numcore::ParamList& out);
};

// Mixture of experts: y = sum_e softmax(gating(x))_e * expert_e(x).
// The gating MLP has one hidden layer of width ceil(input_dim / 2).
struct MoeNet {
  std::vector<numcore::MlpNet> experts;
  numcore::MlpNet gating;

  static MoeNet create(std::size_t input_dim, std::size_t output_dim,
                       const std::vector<std::size_t>& hidden, std::size_t num_experts,
                       numcore::Prng& rng, double final_gain);

  std::size_t input_dim() const { return gating.input_dim(); }
  std::size_t output_dim() const { return experts.front().output_dim(); }
  std::size_t num_experts() const { return experts.size(); }

  // Gating weights, one column per sample; columns sum to 1.
  Matrix gate(const Matrix& x) const;
  Matrix forward(const Matrix& x, MoeCache* cache = nullptr) const;
  // Accumulates into grads; returns dL/dx.
  Matrix backward(const MoeCache& cache, const Matrix& dy, MoeGrads& grads) const;

  MoeGrads zero_grads() const;
  void append_views(numcore::ParamList& out);

  bool operator==(const MoeNet& other) const;
};

// Actor: MoE mean plus the Gaussian head.
struct MoePolicy {
  MoeNet net;
  GaussianHead head;
};

Vector moe_mean(const MoeNet& net, const Vector& obs);

// Column-wise softmax.
Matrix softmax_columns(const Matrix& logits);

}  // namespace fastwbc::policy
