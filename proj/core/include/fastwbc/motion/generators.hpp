#pragma once

#include "fastwbc/env/model.hpp"
#include "fastwbc/motion/clip.hpp"
#include "fastwbc/numcore/prng.hpp"

#include <string>
#include <vector>

namespace fastwbc::motion {

// Ankle sway with the torso held upright: q1 = amp sin(2 pi f t + phase), q2 = -q1.
// amp in (0, 0.6], freq in (0, 2], duration >= 1.
MotionClip gen_sway(double amp, double freq, double duration, double phase,
                    const env::PtbModel& model = {});

// Hip flexion q2 = -amp (1 - cos 2 pi f t) / 2 with ankle compensation q1 = -q2 / 2.
MotionClip gen_squat(double amp, double freq, double duration,
                     const env::PtbModel& model = {});

// Cosine ramp over 1 s to both links leaning by `lean`, then hold.
// lean in (0, 0.5], hold >= 0.
MotionClip gen_lean_hold(double lean, double hold, const env::PtbModel& model = {});

enum class Preset { Source, Target, Aggressive };

Preset parse_preset(const std::string& name);
std::string preset_name(Preset p);

// Annotated clip families: source (8 benign sway/squat clips), target
// (out-of-distribution amplitudes and frequencies plus lean holds), and
// aggressive (lean holds and fast sways mixed with benign clips).
std::vector<MotionClip> make_preset(Preset preset, std::uint64_t seed,
                                    const env::PtbModel& model = {});

}  // namespace fastwbc::motion
