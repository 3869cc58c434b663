#pragma once

#include "fastwbc/numcore/linalg.hpp"
#include "fastwbc/numcore/prng.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace fastwbc::numcore {

// Feed-forward net y = f_L(elu(f_{L-1}(... elu(f_1(x))))), f_l(x) = W_l x + b_l.
// W_l is (out x in); the final layer is linear.
struct MlpNet {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;

  std::size_t num_layers() const { return weights.size(); }
  std::size_t input_dim() const { return weights.empty() ? 0 : weights.front().cols(); }
  std::size_t output_dim() const { return weights.empty() ? 0 : weights.back().rows(); }
  std::size_t num_params() const;

  // dims = {in, h_1, ..., out}; all parameters zero.
  static MlpNet zeros(std::span<const std::size_t> dims);

  // Orthogonal init: hidden layers gain sqrt(2), final layer gain final_gain,
  // zero biases.
  static MlpNet orthogonal(std::span<const std::size_t> dims, Prng& rng,
                           double final_gain = 0.01);

  bool operator==(const MlpNet& other) const;
};

// Pre- and post-activations of one batched forward pass.
struct MlpCache {
  Matrix input;
  std::vector<Matrix> pre;   // pre[l] = W_l a_{l-1} + b_l
  std::vector<Matrix> post;  // post[l] = elu(pre[l]) for hidden layers
};

struct MlpGrads {
  std::vector<Matrix> d_weights;
  std::vector<Vector> d_biases;

  static MlpGrads zeros_like(const MlpNet& net);
  void set_zero();
};

// Batched forward; x holds one sample per column.
Matrix mlp_forward(const MlpNet& net, const Matrix& x, MlpCache* cache = nullptr);
Vector mlp_forward(const MlpNet& net, const Vector& x, MlpCache* cache = nullptr);

// Accumulates dW, db into `grads` and returns dx. `cache` must come from
// mlp_forward on the same net.
Matrix mlp_backward(const MlpNet& net, const MlpCache& cache, const Matrix& dy,
                    MlpGrads& grads);

// Random orthogonal (rows x cols) matrix scaled by gain, via QR of a Gaussian.
Matrix orthogonal_matrix(std::size_t rows, std::size_t cols, double gain, Prng& rng);

}  // namespace fastwbc::numcore
