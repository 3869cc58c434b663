#pragma once

#include "fastwbc/motion/clip.hpp"

#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

namespace fastwbc::motion {

inline constexpr int kClipSchemaVersion = 1;

nlohmann::json clip_to_json(const MotionClip& clip);
// Throws ValidationError naming the offending field path. A clip whose fps is
// not 50 is accepted; `warnings` receives a note.
MotionClip clip_from_json(const nlohmann::json& j, std::vector<std::string>* warnings = nullptr);

void write_clip(const MotionClip& clip, const std::filesystem::path& path);
MotionClip read_clip(const std::filesystem::path& path, std::vector<std::string>* warnings = nullptr);

// All *.json clip files in a directory (manifest.json excluded), sorted by name.
std::vector<MotionClip> read_clip_dir(const std::filesystem::path& dir,
                                      std::vector<std::string>* warnings = nullptr);

}  // namespace fastwbc::motion
