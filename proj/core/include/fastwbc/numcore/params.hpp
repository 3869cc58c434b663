#pragma once

#include "fastwbc/numcore/linalg.hpp"
#include "fastwbc/numcore/mlp.hpp"

#include <cstddef>
#include <vector>

namespace fastwbc::numcore {

// Contiguous block of parameters (or their gradients).
struct ParamView {
  double* data;
  std::size_t size;
};

using ParamList = std::vector<ParamView>;

void append_views(Matrix& m, ParamList& out);
void append_views(Vector& v, ParamList& out);
void append_views(MlpNet& net, ParamList& out);
void append_views(MlpGrads& grads, ParamList& out);

std::size_t total_size(const ParamList& views);
Vector flatten(const ParamList& views);
void unflatten(const Vector& flat, const ParamList& views);
double global_norm(const ParamList& views);
void scale(const ParamList& views, double factor);
void set_zero(const ParamList& views);

// Adam with bias correction. Moment buffers follow the order of the views
// passed on first use.
class Adam {
 public:
  Adam(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(const ParamList& params, const ParamList& grads, double lr);

  long steps() const { return steps_; }
  const std::vector<Vector>& first_moments() const { return m_; }
  const std::vector<Vector>& second_moments() const { return v_; }
  void restore(long steps, std::vector<Vector> m, std::vector<Vector> v);

 private:
  double beta1_, beta2_, eps_;
  long steps_ = 0;
  std::vector<Vector> m_, v_;
};

}  // namespace fastwbc::numcore
