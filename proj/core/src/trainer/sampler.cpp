#include "fastwbc/trainer/sampler.hpp"

#include "fastwbc/error.hpp"

#include <algorithm>

namespace fastwbc::trainer {

SamplerState SamplerState::create(const motion::MotionLibrary& lib, double floor) {
  lib.validate();
  if (!(floor > 0)) throw ValidationError("sampler floor must be positive");
  SamplerState s;
  s.floor = floor;
  for (const auto& clip : lib.clips) {
    // The last frame has no step after it, so segments cover frames [0, N-1).
    auto segs = motion::segment_clips(clip.frames.size() - 1, lib.clip_len);
    const std::size_t n = segs.size();
    s.segments.push_back(std::move(segs));
    s.attempts.emplace_back(n, 0.0);
    s.failures.emplace_back(n, 0.0);
    s.p_seg.emplace_back(n, 1.0 / static_cast<double>(n));
  }
  s.p_motion.assign(lib.clips.size(), 1.0 / static_cast<double>(lib.clips.size()));
  return s;
}

std::size_t SamplerState::segment_of(std::size_t clip, std::size_t frame) const {
  const auto& segs = segments.at(clip);
  for (std::size_t i = 0; i < segs.size(); ++i) {
    if (frame < segs[i].second) return i;
  }
  return segs.size() - 1;
}

void SamplerState::record_attempt(std::size_t clip, std::size_t seg) { attempts.at(clip).at(seg) += 1.0; }

void SamplerState::record_failure(std::size_t clip, std::size_t seg) { failures.at(clip).at(seg) += 1.0; }

std::pair<std::size_t, std::size_t> SamplerState::sample(numcore::Prng& rng) const {
  const std::size_t m = rng.categorical(p_motion);
  const std::size_t seg = rng.categorical(p_seg[m]);
  return {m, seg};
}

std::vector<double> floor_distribution(const std::vector<double>& rates, double floor) {
  std::vector<double> p(rates.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    p[i] = rates[i] + floor;
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

void update_sampler(SamplerState& s) {
  std::vector<double> motion_rates(s.num_clips(), 0.0);
  for (std::size_t m = 0; m < s.num_clips(); ++m) {
    const std::size_t n = s.segments[m].size();
    std::vector<double> rates(n, 0.0);
    double att = 0.0, fail = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (s.attempts[m][i] > 0) rates[i] = std::min(1.0, s.failures[m][i] / s.attempts[m][i]);
      att += s.attempts[m][i];
      fail += s.failures[m][i];
    }
    s.p_seg[m] = floor_distribution(rates, s.floor);
    motion_rates[m] = att > 0 ? std::min(1.0, fail / att) : 0.0;
    std::fill(s.attempts[m].begin(), s.attempts[m].end(), 0.0);
    std::fill(s.failures[m].begin(), s.failures[m].end(), 0.0);
  }
  s.p_motion = floor_distribution(motion_rates, s.floor);
}

}  // namespace fastwbc::trainer
