#pragma once

#include "fastwbc/env/env.hpp"
#include "fastwbc/numcore/mlp.hpp"
#include "fastwbc/numcore/params.hpp"
#include "fastwbc/policy/moe.hpp"
#include "fastwbc/trainer/agent.hpp"
#include "fastwbc/trainer/sampler.hpp"

#include <nlohmann/json.hpp>
#include <string>

namespace fastwbc::trainer::io {

using nlohmann::json;

// Matrices are written as arrays of rows. Readers throw ValidationError naming
// the field path.
json to_json(const Matrix& m);
json to_json(const Vector& v);
json to_json(const numcore::MlpNet& net);
json to_json(const policy::MoeNet& net);
json to_json(const RunningNorm& n);
json to_json(const env::PtbModel& m);
json to_json(const env::EnvSnapshot& s);
json to_json(const SamplerState& s);
json to_json(const numcore::Adam& a);

class Reader {
 public:
  explicit Reader(std::string path = "$") : path_(std::move(path)) {}
  Reader at(const std::string& key) const { return Reader(path_ + "." + key); }
  Reader at(std::size_t i) const { return Reader(path_ + "[" + std::to_string(i) + "]"); }
  const std::string& path() const { return path_; }

  const json& field(const json& obj, const std::string& key) const;
  double number(const json& j) const;
  std::uint64_t u64(const json& j) const;
  long integer(const json& j) const;
  bool boolean(const json& j) const;
  std::string string(const json& j) const;
  const json& array(const json& j) const;

  Matrix matrix(const json& j) const;
  Vector vector(const json& j) const;
  numcore::MlpNet mlp(const json& j) const;
  policy::MoeNet moe(const json& j) const;
  RunningNorm norm(const json& j) const;
  env::PtbModel model(const json& j) const;
  env::EnvSnapshot env_snapshot(const json& j) const;
  SamplerState sampler(const json& j) const;
  void adam(const json& j, numcore::Adam& out) const;

  [[noreturn]] void fail(const std::string& what) const;

 private:
  std::string path_;
};

}  // namespace fastwbc::trainer::io
