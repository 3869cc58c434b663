#include "fastwbc/motion/clip.hpp"

#include "fastwbc/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fastwbc::motion {

double MotionClip::duration() const {
  return frames.empty() ? 0.0 : static_cast<double>(frames.size() - 1) / fps;
}

void MotionLibrary::validate() const {
  if (clips.empty()) throw ValidationError("MotionLibrary: no clips");
  if (clip_len < 10) throw ValidationError("MotionLibrary: clip_len must be >= 10");
  for (const auto& c : clips) {
    if (c.frames.size() < 2) throw ValidationError("MotionLibrary: clip '" + c.name + "' has < 2 frames");
  }
}

double ref_com_cop_distance(const MotionFrame& f, double foot_half) {
  if (!f.cop_valid) return std::numeric_limits<double>::infinity();
  const double centre = f.keypoints.ankle.x();
  const double cop = std::clamp(f.cop_x, centre - foot_half, centre + foot_half);
  return std::abs(f.com.x() - cop);
}

std::vector<std::pair<std::size_t, std::size_t>> segment_clips(std::size_t num_frames,
                                                               std::size_t clip_len) {
  if (clip_len < 10) throw ValidationError("segment_clips: clip_len must be >= 10");
  std::vector<std::pair<std::size_t, std::size_t>> out;
  if (num_frames == 0) return out;
  const std::size_t n = std::max<std::size_t>(1, num_frames / clip_len);
  for (std::size_t i = 0; i < n; ++i) out.emplace_back(i * clip_len, (i + 1) * clip_len);
  out.back().second = num_frames;
  return out;
}

}  // namespace fastwbc::motion
