#pragma once

#include "fastwbc/env/state.hpp"
#include "fastwbc/motion/clip.hpp"

#include <array>
#include <cstddef>
#include <string>

namespace fastwbc::reward {

using env::Vec2;

enum class Term : std::size_t {
  JointPos,
  BodyPos,
  BodyOrient,
  BodyLinVel,
  BodyAngVel,
  AnchorPos,
  AnchorOrient,
  Contact,
  ActionSmooth,
  SelfContact,
  Balance,
  Termination,
  JointLimit,
};
inline constexpr std::size_t kNumTerms = 13;

std::string term_name(Term t);
inline Term term_at(std::size_t i) { return static_cast<Term>(i); }

struct RewardWeights {
  double joint_pos = 1.0, joint_pos_sigma_sq = 0.4 * 0.4;
  double body_pos = 1.0, body_pos_sigma_sq = 0.3 * 0.3;
  double body_orient = 1.0, body_orient_sigma_sq = 0.4 * 0.4;
  double body_linvel = 1.0, body_linvel_sigma_sq = 1.0;
  double body_angvel = 1.0, body_angvel_sigma_sq = 3.14 * 3.14;
  double anchor_pos = 0.5, anchor_pos_sigma_sq = 0.3 * 0.3;
  double anchor_orient = 0.5, anchor_orient_sigma_sq = 0.4 * 0.4;
  double contact = 1.0;
  double action_smooth = -0.1;
  double self_contact = -0.1;
  double balance = 2.0;  // magnitude; enters as a penalty
  double balance_threshold = 0.12;
  double balance_divisor = 0.08 * 0.08;
  double termination = -1.0;
  double joint_limit = -10.0;

  // Signed weight applied to the raw value of each term.
  double weight(Term t) const;
  void validate() const;
};

struct AdaptiveWeightCfg {
  double tau = 0.05;
  double kappa = 0.05;
  double w_min = 0.1;
  void validate() const;
};

struct RewardFlags {
  bool use_w_track = true;
  bool use_balance = true;
  // Literal table row: +(-2) * score instead of the penalty -2 (1 - score).
  bool balance_sign_literal = false;
};

// Raw (unweighted) value per term. Gaussian terms hold their score, penalty
// terms hold the penalised quantity.
struct RewardTerms {
  std::array<double, kNumTerms> raw{};
  std::array<bool, kNumTerms> present{};

  void set(Term t, double v) {
    raw[static_cast<std::size_t>(t)] = v;
    present[static_cast<std::size_t>(t)] = true;
  }
  double get(Term t) const { return raw[static_cast<std::size_t>(t)]; }
};

double gauss_score(double sq_err, double sigma_sq);

// Gaussian task terms (joint, body and anchor tracking).
RewardTerms tracking_terms(const env::PtbModel& model, const env::EnvState& state,
                           const motion::MotionFrame& ref, const RewardWeights& w);

double contact_reward(const std::array<int, 2>& c, const std::array<int, 2>& c_ref);

// 1 - exp(-max(d - threshold, 0) / divisor) with d = |com_x - cop_x|.
double balance_deficit(double com_x, double cop_x, const RewardWeights& w);
// -balance * balance_deficit: zero when balanced, towards -2 when far.
double balance_penalty(const Vec2& com, double cop_x, const RewardWeights& w);

// clip(exp(-max(0, d_ref - tau) / kappa), w_min, 1); d_ref = +inf gives w_min.
double adaptive_weight(double d_ref, const AdaptiveWeightCfg& cfg);

// True for the terms scaled by w_track: joint_pos, body_pos, anchor_pos.
bool is_tracked(Term t);

struct AuxSignals {
  Vec2 action = Vec2::Zero();
  Vec2 last_action = Vec2::Zero();
  bool terminated = false;
  double joint_limit_violation = 0.0;  // sum of distances beyond the limits
  int ground_collisions = 0;           // non-foot keypoints below the ground
};

// Adds contact, action smoothness, self contact, balance, termination and
// joint-limit terms.
void add_aux_terms(RewardTerms& terms, const AuxSignals& aux, const std::array<int, 2>& contacts,
                   const std::array<int, 2>& ref_contacts, double com_x, double cop_x,
                   const RewardWeights& w, const RewardFlags& flags);

double joint_limit_violation(const env::PtbModel& model, const Vec2& q);
int ground_collisions(const env::Keypoints& k);

// sum_t weight(t) * raw(t) * (w_track if tracked). Throws ValidationError if
// any term is missing.
double total_reward(const RewardTerms& terms, double w_track, const RewardWeights& w);

// Signed contribution of each term to total_reward.
std::array<double, kNumTerms> weighted_terms(const RewardTerms& terms, double w_track,
                                             const RewardWeights& w);

}  // namespace fastwbc::reward
