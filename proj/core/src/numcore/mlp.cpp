#include "fastwbc/numcore/mlp.hpp"

#include "fastwbc/error.hpp"

#include <string>

namespace fastwbc::numcore {

namespace {

void check_dims(std::span<const std::size_t> dims) {
  if (dims.size() < 2) throw ValidationError("MlpNet: need at least input and output dims");
  for (std::size_t d : dims) {
    if (d == 0) throw ValidationError("MlpNet: zero-width layer");
  }
}

}  // namespace

std::size_t MlpNet::num_params() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
  return n;
}

MlpNet MlpNet::zeros(std::span<const std::size_t> dims) {
  check_dims(dims);
  MlpNet net;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    net.weights.push_back(Matrix::Zero(dims[l + 1], dims[l]));
    net.biases.push_back(Vector::Zero(dims[l + 1]));
  }
  return net;
}

MlpNet MlpNet::orthogonal(std::span<const std::size_t> dims, Prng& rng, double final_gain) {
  MlpNet net = zeros(dims);
  const std::size_t n = net.num_layers();
  for (std::size_t l = 0; l < n; ++l) {
    const double gain = (l + 1 == n) ? final_gain : std::sqrt(2.0);
    net.weights[l] = orthogonal_matrix(dims[l + 1], dims[l], gain, rng);
  }
  return net;
}

bool MlpNet::operator==(const MlpNet& other) const {
  if (weights.size() != other.weights.size()) return false;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l].rows() != other.weights[l].rows() ||
        weights[l].cols() != other.weights[l].cols() || weights[l] != other.weights[l] ||
        biases[l] != other.biases[l]) {
      return false;
    }
  }
  return true;
}

MlpGrads MlpGrads::zeros_like(const MlpNet& net) {
  MlpGrads g;
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    g.d_weights.push_back(Matrix::Zero(net.weights[l].rows(), net.weights[l].cols()));
    g.d_biases.push_back(Vector::Zero(net.biases[l].size()));
  }
  return g;
}

void MlpGrads::set_zero() {
  for (auto& w : d_weights) w.setZero();
  for (auto& b : d_biases) b.setZero();
}

Matrix mlp_forward(const MlpNet& net, const Matrix& x, MlpCache* cache) {
  if (net.num_layers() == 0) throw ValidationError("mlp_forward: empty network");
  if (static_cast<std::size_t>(x.rows()) != net.input_dim()) {
    throw ValidationError("mlp_forward: input has " + std::to_string(x.rows()) +
                          " rows, network expects " + std::to_string(net.input_dim()));
  }
  const std::size_t n = net.num_layers();
  if (cache) {
    cache->input = x;
    cache->pre.resize(n);
    cache->post.resize(n - 1);
  }
  Matrix a = x;
  for (std::size_t l = 0; l < n; ++l) {
    Matrix z = net.weights[l] * a;
    z.colwise() += net.biases[l];
    if (l + 1 == n) {
      if (cache) cache->pre[l] = z;
      return z;
    }
    // Vectorized elu; exp of the clamped input never overflows.
    Matrix h = (z.array() > 0.0).select(z.array(), z.array().min(0.0).exp() - 1.0).matrix();
    if (cache) {
      cache->pre[l] = std::move(z);
      cache->post[l] = h;
    }
    a = std::move(h);
  }
  return a;  // unreachable
}

Vector mlp_forward(const MlpNet& net, const Vector& x, MlpCache* cache) {
  const Matrix y = mlp_forward(net, Matrix(x), cache);
  return y.col(0);
}

Matrix mlp_backward(const MlpNet& net, const MlpCache& cache, const Matrix& dy,
                    MlpGrads& grads) {
  const std::size_t n = net.num_layers();
  if (cache.pre.size() != n || cache.post.size() + 1 != n ||
      static_cast<std::size_t>(cache.input.rows()) != net.input_dim()) {
    throw ValidationError("mlp_backward: cache does not match network");
  }
  if (static_cast<std::size_t>(dy.rows()) != net.output_dim() ||
      dy.cols() != cache.input.cols()) {
    throw ValidationError("mlp_backward: dy is " + std::to_string(dy.rows()) + "x" +
                          std::to_string(dy.cols()) + ", expected " +
                          std::to_string(net.output_dim()) + "x" +
                          std::to_string(cache.input.cols()));
  }
  if (grads.d_weights.size() != n) grads = MlpGrads::zeros_like(net);
  for (std::size_t l = 0; l < n; ++l) {
    if (cache.pre[l].rows() != net.weights[l].rows()) {
      throw ValidationError("mlp_backward: stale cache at layer " + std::to_string(l));
    }
  }

  Matrix delta = dy;
  for (std::size_t l = n; l-- > 0;) {
    const Matrix& a_in = (l == 0) ? cache.input : cache.post[l - 1];
    grads.d_weights[l].noalias() += delta * a_in.transpose();
    grads.d_biases[l] += delta.rowwise().sum();
    Matrix back = net.weights[l].transpose() * delta;
    if (l == 0) return back;
    // elu'(z) = elu(z) + 1 for z <= 0.
    const Matrix& z = cache.pre[l - 1];
    const Matrix& h = cache.post[l - 1];
    delta = back.cwiseProduct((z.array() > 0.0).select(1.0, h.array() + 1.0).matrix());
  }
  return delta;  // unreachable
}

Matrix orthogonal_matrix(std::size_t rows, std::size_t cols, double gain, Prng& rng) {
  const std::size_t big = std::max(rows, cols);
  const std::size_t small = std::min(rows, cols);
  Matrix g(big, small);
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(big, small);
  // Sign fix so the distribution is uniform over orthogonal matrices.
  const Matrix r = qr.matrixQR().topRows(small).triangularView<Eigen::Upper>();
  for (std::size_t j = 0; j < small; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  Matrix out = (rows >= cols) ? q : Matrix(q.transpose());
  return gain * out;
}

}  // namespace fastwbc::numcore
