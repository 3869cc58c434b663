#pragma once

#include "fastwbc/motion/clip.hpp"
#include "fastwbc/numcore/prng.hpp"

#include <cstddef>
#include <utility>
#include <vector>

namespace fastwbc::trainer {

// Two-stage adaptive sampling over (motion, segment). Counts accumulate
// between updates and are cleared by update_sampler.
struct SamplerState {
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> segments;  // per clip
  std::vector<std::vector<double>> attempts;
  std::vector<std::vector<double>> failures;
  std::vector<std::vector<double>> p_seg;
  std::vector<double> p_motion;
  double floor = 0.05;

  static SamplerState create(const motion::MotionLibrary& lib, double floor);
  std::size_t num_clips() const { return segments.size(); }
  // Segment containing a frame of a clip.
  std::size_t segment_of(std::size_t clip, std::size_t frame) const;
  void record_attempt(std::size_t clip, std::size_t seg);
  void record_failure(std::size_t clip, std::size_t seg);
  // Motion first, then segment within the motion.
  std::pair<std::size_t, std::size_t> sample(numcore::Prng& rng) const;
};

// p_seg(m) proportional to fail/attempt + floor; p_motion proportional to the
// motion's aggregate fail/attempt + floor. Zero attempts count as rate 0.
void update_sampler(SamplerState& s);

// Rate-plus-floor normalization used by update_sampler.
std::vector<double> floor_distribution(const std::vector<double>& rates, double floor);

}  // namespace fastwbc::trainer
