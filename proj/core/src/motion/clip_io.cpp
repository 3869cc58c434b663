#include "fastwbc/motion/clip_io.hpp"

#include "fastwbc/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace fastwbc::motion {

namespace {

using nlohmann::json;

json vec(const Vec2& v) { return json::array({v(0), v(1)}); }

class Reader {
 public:
  explicit Reader(std::string path) : path_(std::move(path)) {}

  const json& field(const json& obj, const char* key) const {
    if (!obj.is_object() || !obj.contains(key)) fail(std::string(".") + key, "missing");
    return obj.at(key);
  }

  double number(const json& obj, const char* key) const {
    const json& v = field(obj, key);
    if (!v.is_number()) fail(std::string(".") + key, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(std::string(".") + key, "not finite");
    return d;
  }

  Vec2 vec2(const json& obj, const char* key) const {
    const json& v = field(obj, key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      fail(std::string(".") + key, "expected an array of 2 numbers");
    }
    Vec2 out(v[0].get<double>(), v[1].get<double>());
    if (!out.allFinite()) fail(std::string(".") + key, "not finite");
    return out;
  }

  Reader at(const std::string& suffix) const { return Reader(path_ + suffix); }

  [[noreturn]] void fail(const std::string& suffix, const std::string& what) const {
    throw ValidationError("clip field " + path_ + suffix + ": " + what);
  }

 private:
  std::string path_;
};

}  // namespace

json clip_to_json(const MotionClip& clip) {
  json frames = json::array();
  for (const auto& f : clip.frames) {
    frames.push_back({
        {"root_pos", vec(f.root_pos)},
        {"root_ang", f.root_ang},
        {"joints", vec(f.joints)},
        {"joint_vel", vec(f.joint_vel)},
        {"keypoints",
         {{"ankle", vec(f.keypoints.ankle)},
          {"hip", vec(f.keypoints.hip)},
          {"head", vec(f.keypoints.head)},
          {"heel", vec(f.keypoints.heel)},
          {"toe", vec(f.keypoints.toe)}}},
        {"lin_vel", vec(f.lin_vel)},
        {"ang_vel", f.ang_vel},
        {"contact", {f.contact[0], f.contact[1]}},
        {"com", vec(f.com)},
        {"cop_x", f.cop_x},
        {"cop_valid", f.cop_valid},
    });
  }
  return {
      {"schema_version", kClipSchemaVersion},
      {"name", clip.name},
      {"fps", clip.fps},
      {"tags", clip.tags},
      {"meta", clip.meta},
      {"frames", std::move(frames)},
  };
}

MotionClip clip_from_json(const json& j, std::vector<std::string>* warnings) {
  const Reader r("$");
  if (!j.is_object()) r.fail("", "expected an object");
  const json& version = r.field(j, "schema_version");
  if (!version.is_number_integer() || version.get<int>() != kClipSchemaVersion) {
    r.fail(".schema_version", "unsupported (expected " + std::to_string(kClipSchemaVersion) + ")");
  }
  MotionClip clip;
  const json& name = r.field(j, "name");
  if (!name.is_string()) r.fail(".name", "expected a string");
  clip.name = name.get<std::string>();
  clip.fps = r.number(j, "fps");
  if (!(clip.fps > 0.0)) r.fail(".fps", "must be positive");
  if (clip.fps != kClipFps && warnings) {
    warnings->push_back("clip '" + clip.name + "' has fps " + std::to_string(clip.fps) +
                        " (expected 50)");
  }
  if (j.contains("tags")) {
    const json& tags = j.at("tags");
    if (!tags.is_array()) r.fail(".tags", "expected an array of strings");
    for (std::size_t i = 0; i < tags.size(); ++i) {
      if (!tags[i].is_string()) r.fail(".tags[" + std::to_string(i) + "]", "expected a string");
      clip.tags.insert(tags[i].get<std::string>());
    }
  }
  if (j.contains("meta")) {
    const json& meta = j.at("meta");
    if (!meta.is_object()) r.fail(".meta", "expected an object");
    const Reader rm = r.at(".meta");
    for (const auto& [key, _] : meta.items()) clip.meta[key] = rm.number(meta, key.c_str());
  }
  const json& frames = r.field(j, "frames");
  if (!frames.is_array()) r.fail(".frames", "expected an array");
  clip.frames.reserve(frames.size());
  for (std::size_t k = 0; k < frames.size(); ++k) {
    const Reader rf = r.at(".frames[" + std::to_string(k) + "]");
    const json& fj = frames[k];
    if (!fj.is_object()) rf.fail("", "expected an object");
    MotionFrame f;
    f.root_pos = rf.vec2(fj, "root_pos");
    f.root_ang = rf.number(fj, "root_ang");
    f.joints = rf.vec2(fj, "joints");
    f.joint_vel = rf.vec2(fj, "joint_vel");
    const json& kp = rf.field(fj, "keypoints");
    const Reader rk = rf.at(".keypoints");
    f.keypoints = {rk.vec2(kp, "ankle"), rk.vec2(kp, "hip"), rk.vec2(kp, "head"),
                   rk.vec2(kp, "heel"), rk.vec2(kp, "toe")};
    f.lin_vel = rf.vec2(fj, "lin_vel");
    f.ang_vel = rf.number(fj, "ang_vel");
    const json& c = rf.field(fj, "contact");
    if (!c.is_array() || c.size() != 2) rf.fail(".contact", "expected an array of 2 flags");
    for (int i = 0; i < 2; ++i) {
      if (!c[i].is_number_integer() || (c[i].get<int>() != 0 && c[i].get<int>() != 1)) {
        rf.fail(".contact[" + std::to_string(i) + "]", "expected 0 or 1");
      }
      f.contact[i] = c[i].get<int>();
    }
    f.com = rf.vec2(fj, "com");
    f.cop_x = rf.number(fj, "cop_x");
    const json& valid = rf.field(fj, "cop_valid");
    if (!valid.is_boolean()) rf.fail(".cop_valid", "expected a boolean");
    f.cop_valid = valid.get<bool>();
    clip.frames.push_back(f);
  }
  if (clip.frames.empty()) r.fail(".frames", "must contain at least one frame");
  return clip;
}

void write_clip(const MotionClip& clip, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open '" + path.string() + "' for writing");
  out << clip_to_json(clip).dump() << '\n';
  if (!out) throw ValidationError("failed writing '" + path.string() + "'");
}

MotionClip read_clip(const std::filesystem::path& path, std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open clip '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("clip '" + path.string() + "' is not valid JSON: " + e.what());
  }
  try {
    return clip_from_json(j, warnings);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::vector<MotionClip> read_clip_dir(const std::filesystem::path& dir,
                                      std::vector<std::string>* warnings) {
  if (!std::filesystem::is_directory(dir)) {
    throw ValidationError("'" + dir.string() + "' is not a directory");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto& p = entry.path();
    if (entry.is_regular_file() && p.extension() == ".json" && p.filename() != "manifest.json") {
      files.push_back(p);
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ValidationError("no clip files in '" + dir.string() + "'");
  std::vector<MotionClip> clips;
  clips.reserve(files.size());
  for (const auto& p : files) clips.push_back(read_clip(p, warnings));
  return clips;
}

}  // namespace fastwbc::motion
