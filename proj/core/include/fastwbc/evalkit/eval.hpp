#pragma once

#include "fastwbc/config/run_config.hpp"
#include "fastwbc/evalkit/metrics.hpp"
#include "fastwbc/motion/clip.hpp"
#include "fastwbc/trainer/agent.hpp"

#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

namespace fastwbc::evalkit {

// Deterministic-mean rollouts of every clip from its first frame. Episode e of
// clip c uses its own stream derived from (seed, c, e); domain randomization
// follows cfg.eval.domain_rand.
MetricsReport run_eval(const trainer::Agent& agent, const motion::MotionLibrary& lib,
                       const config::RunConfig& cfg, env::EvalMode mode, int episodes_per_clip,
                       std::uint64_t seed, const std::string& checkpoint_id = "");

// One row per control step of a single episode.
struct TrajectoryRow {
  double t = 0;
  Vec2 q, q_ref;
  std::array<Vec2, 3> keypoints, keypoints_ref;
  Vec2 com, com_ref;
  double cop_x = 0, cop_ref = 0;
  double w_track = 1;
  double reward = 0;
  std::array<double, 13> terms{};
  std::string termination;
};

std::vector<TrajectoryRow> replay(const trainer::Agent& agent, const motion::MotionClip& clip,
                                  const config::RunConfig& cfg, env::EvalMode mode,
                                  std::uint64_t seed);
void write_trajectory_csv(const std::vector<TrajectoryRow>& rows, const std::filesystem::path& path);

nlohmann::json report_to_json(const MetricsReport& r);
MetricsReport report_from_json(const nlohmann::json& j);
std::string report_to_csv(const MetricsReport& r);
// format is "json" or "csv".
void emit_report(const MetricsReport& r, const std::string& format, const std::filesystem::path& path,
                 const nlohmann::json& config = nullptr);

enum class Metric { Succ, Mpjpe, Mpkpe, Vel, Slip, Mpd };
std::string metric_name(Metric m);
double metric_mean(const MetricSet& m, Metric which);

struct Direction {
  Metric metric;
  bool a_greater;  // require a > b (else a < b); strict
};

struct DirectionResult {
  Metric metric;
  bool a_greater;
  double a, b;
  bool pass;
};

// Directional checks on aggregate means; reports must share mode, seed,
// episode count and clip names.
std::vector<DirectionResult> ablation_compare(const MetricsReport& a, const MetricsReport& b,
                                              const std::vector<Direction>& dirs);
// Multi-seed form: directions are checked on the mean over seeds (>= 3).
std::vector<DirectionResult> ablation_compare(const std::vector<MetricsReport>& a,
                                              const std::vector<MetricsReport>& b,
                                              const std::vector<Direction>& dirs);

struct PropositionReport {
  // Residual Lipschitz constant: layerwise bound vs sampled estimate.
  double lipschitz_bound = 0;
  double empirical_lipschitz = 0;
  bool lipschitz_holds = false;
  // Residual mean norm vs the shared-covariance KL bound.
  std::size_t n_states = 0;
  double max_violation = 0;      // max(||mu_r||^2 - 2 KL lambda_max, 0)
  double max_isotropic_gap = 0;  // | ||mu_r||^2 - 2 KL sigma^2 | with an isotropic head
  double max_residual_norm = 0;
  bool kl_bound_holds = false;
};

// Requires a residual. States come from composite-policy rollouts on lib.
PropositionReport verify_propositions(const trainer::Agent& agent, const motion::MotionLibrary& lib,
                                      const config::RunConfig& cfg, std::size_t n_states,
                                      int n_pairs, std::uint64_t seed);
nlohmann::json propositions_to_json(const PropositionReport& r);

// Normalized actor observations visited by the deterministic policy.
trainer::Matrix collect_states(const trainer::Agent& agent, const motion::MotionLibrary& lib,
                               const config::RunConfig& cfg, std::size_t n_states,
                               std::uint64_t seed);

}  // namespace fastwbc::evalkit
