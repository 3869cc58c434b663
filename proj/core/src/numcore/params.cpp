#include "fastwbc/numcore/params.hpp"

#include "fastwbc/error.hpp"

#include <cmath>

namespace fastwbc::numcore {

void append_views(Matrix& m, ParamList& out) {
  out.push_back({m.data(), static_cast<std::size_t>(m.size())});
}

void append_views(Vector& v, ParamList& out) {
  out.push_back({v.data(), static_cast<std::size_t>(v.size())});
}

void append_views(MlpNet& net, ParamList& out) {
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    append_views(net.weights[l], out);
    append_views(net.biases[l], out);
  }
}

void append_views(MlpGrads& grads, ParamList& out) {
  for (std::size_t l = 0; l < grads.d_weights.size(); ++l) {
    append_views(grads.d_weights[l], out);
    append_views(grads.d_biases[l], out);
  }
}

std::size_t total_size(const ParamList& views) {
  std::size_t n = 0;
  for (const auto& v : views) n += v.size;
  return n;
}

Vector flatten(const ParamList& views) {
  Vector flat(static_cast<Eigen::Index>(total_size(views)));
  Eigen::Index k = 0;
  for (const auto& v : views) {
    for (std::size_t i = 0; i < v.size; ++i) flat(k++) = v.data[i];
  }
  return flat;
}

void unflatten(const Vector& flat, const ParamList& views) {
  if (static_cast<std::size_t>(flat.size()) != total_size(views)) {
    throw ValidationError("unflatten: size mismatch");
  }
  Eigen::Index k = 0;
  for (const auto& v : views) {
    for (std::size_t i = 0; i < v.size; ++i) v.data[i] = flat(k++);
  }
}

double global_norm(const ParamList& views) {
  double sq = 0.0;
  for (const auto& v : views) {
    for (std::size_t i = 0; i < v.size; ++i) sq += v.data[i] * v.data[i];
  }
  return std::sqrt(sq);
}

void scale(const ParamList& views, double factor) {
  for (const auto& v : views) {
    for (std::size_t i = 0; i < v.size; ++i) v.data[i] *= factor;
  }
}

void set_zero(const ParamList& views) { scale(views, 0.0); }

void Adam::step(const ParamList& params, const ParamList& grads, double lr) {
  if (params.size() != grads.size()) throw ValidationError("Adam: params/grads mismatch");
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.push_back(Vector::Zero(static_cast<Eigen::Index>(p.size)));
      v_.push_back(Vector::Zero(static_cast<Eigen::Index>(p.size)));
    }
  }
  if (m_.size() != params.size()) throw ValidationError("Adam: parameter layout changed");
  ++steps_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(steps_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    const auto& p = params[k];
    const auto& g = grads[k];
    if (p.size != g.size || static_cast<std::size_t>(m_[k].size()) != p.size) {
      throw ValidationError("Adam: block size mismatch");
    }
    for (std::size_t i = 0; i < p.size; ++i) {
      const double gi = g.data[i];
      m_[k](i) = beta1_ * m_[k](i) + (1.0 - beta1_) * gi;
      v_[k](i) = beta2_ * v_[k](i) + (1.0 - beta2_) * gi * gi;
      p.data[i] -= lr * (m_[k](i) / c1) / (std::sqrt(v_[k](i) / c2) + eps_);
    }
  }
}

void Adam::restore(long steps, std::vector<Vector> m, std::vector<Vector> v) {
  steps_ = steps;
  m_ = std::move(m);
  v_ = std::move(v);
}

}  // namespace fastwbc::numcore
