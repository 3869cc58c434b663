#pragma once

#include "fastwbc/config/run_config.hpp"
#include "fastwbc/env/env.hpp"
#include "fastwbc/numcore/params.hpp"
#include "fastwbc/trainer/agent.hpp"
#include "fastwbc/trainer/sampler.hpp"

#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

namespace fastwbc::trainer {

inline constexpr int kCheckpointSchemaVersion = 1;

struct EnvSlotState {
  env::EnvSnapshot env;
  std::uint64_t action_rng = 0;
  std::size_t clip = 0;
  std::size_t segment = 0;
};

// Everything besides the agent that a resumed run needs to continue
// bit-exactly.
struct RuntimeState {
  std::vector<EnvSlotState> envs;
  SamplerState sampler;
  std::uint64_t sampler_rng = 0;
  std::uint64_t shuffle_rng = 0;
  numcore::Adam adam;
  double lr = 0.0;
};

struct Checkpoint {
  Agent agent;
  config::RunConfig config;
  std::uint64_t seed = 0;
  int iteration = 0;
  std::optional<RuntimeState> runtime;

  Stage stage() const { return agent.stage(); }
};

nlohmann::json checkpoint_to_json(const Checkpoint& c);
// Rejects schema or observation-layout mismatches and malformed fields,
// naming the offending path.
Checkpoint checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// 64-bit FNV-1a of the serialized checkpoint, as 16 hex digits.
std::string checkpoint_id(const Checkpoint& c);

}  // namespace fastwbc::trainer
