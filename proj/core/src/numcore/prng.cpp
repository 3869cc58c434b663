#include "fastwbc/numcore/prng.hpp"

#include "fastwbc/error.hpp"

#include <cmath>
#include <numbers>

namespace fastwbc::numcore {

double Prng::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t Prng::index(std::size_t n) {
  if (n == 0) throw ValidationError("Prng::index: empty range");
  return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
}

std::size_t Prng::categorical(std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (weights.empty() || !(total > 0.0)) {
    throw ValidationError("Prng::categorical: weights must have positive sum");
  }
  double u = uniform() * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    u -= weights[i];
    if (u < 0.0) return i;
  }
  return weights.size() - 1;
}

}  // namespace fastwbc::numcore
