#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace fastwbc::numcore {

// splitmix64 counter stream. Independent consumers get their own instance
// seeded with sub_seed(seed, tag) = seed ^ tag.
class Prng {
 public:
  explicit Prng(std::uint64_t seed = 0) : state_(seed) {}

  static Prng from_state(std::uint64_t state) { return Prng(state); }
  static constexpr std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t tag) {
    return seed ^ tag;
  }

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal, Box-Muller, one draw per call (no cached spare).
  double normal();

  // Uniform index in [0, n).
  std::size_t index(std::size_t n);

  // Draw from an unnormalized categorical distribution.
  std::size_t categorical(std::span<const double> weights);

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

// Consumer tags for sub-seeding.
namespace tags {
inline constexpr std::uint64_t kInit = 0x1A1F00D5ULL;
inline constexpr std::uint64_t kEnv = 0xE0E0E0E000000000ULL;
inline constexpr std::uint64_t kSampler = 0x5A3B1E5ULL;
inline constexpr std::uint64_t kShuffle = 0x5F0FF1E5ULL;
inline constexpr std::uint64_t kEval = 0xE7A1E7A1ULL;
inline constexpr std::uint64_t kPower = 0x9E37ULL;
inline constexpr std::uint64_t kMotion = 0x30710000ULL;
}  // namespace tags

}  // namespace fastwbc::numcore
