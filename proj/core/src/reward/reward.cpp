#include "fastwbc/reward/reward.hpp"

#include "fastwbc/error.hpp"

#include <algorithm>
#include <cmath>

namespace fastwbc::reward {

std::string term_name(Term t) {
  static const char* names[kNumTerms] = {
      "joint_pos",     "body_pos",     "body_orient",   "body_linvel", "body_angvel",
      "anchor_pos",    "anchor_orient", "contact",      "action_smooth", "self_contact",
      "balance",       "termination",  "joint_limit"};
  return names[static_cast<std::size_t>(t)];
}

double RewardWeights::weight(Term t) const {
  switch (t) {
    case Term::JointPos: return joint_pos;
    case Term::BodyPos: return body_pos;
    case Term::BodyOrient: return body_orient;
    case Term::BodyLinVel: return body_linvel;
    case Term::BodyAngVel: return body_angvel;
    case Term::AnchorPos: return anchor_pos;
    case Term::AnchorOrient: return anchor_orient;
    case Term::Contact: return contact;
    case Term::ActionSmooth: return action_smooth;
    case Term::SelfContact: return self_contact;
    case Term::Balance: return -balance;
    case Term::Termination: return termination;
    case Term::JointLimit: return joint_limit;
  }
  return 0.0;
}

void RewardWeights::validate() const {
  const bool ok = joint_pos_sigma_sq > 0 && body_pos_sigma_sq > 0 && body_orient_sigma_sq > 0 &&
                  body_linvel_sigma_sq > 0 && body_angvel_sigma_sq > 0 &&
                  anchor_pos_sigma_sq > 0 && anchor_orient_sigma_sq > 0 && balance_divisor > 0;
  if (!ok) throw ValidationError("RewardWeights: every sigma^2 and the balance divisor must be > 0");
}

void AdaptiveWeightCfg::validate() const {
  if (!(tau >= 0 && kappa > 0 && w_min > 0 && w_min <= 1)) {
    throw ValidationError("AdaptiveWeightCfg: need tau >= 0, kappa > 0, w_min in (0, 1]");
  }
}

double gauss_score(double sq_err, double sigma_sq) { return std::exp(-sq_err / sigma_sq); }

RewardTerms tracking_terms(const env::PtbModel& model, const env::EnvState& state,
                           const motion::MotionFrame& ref, const RewardWeights& w) {
  const env::BodyState b = env::body_state(model, state);
  const env::RefBodyState r = env::ref_body_state(model, ref);
  const std::array<Vec2, 3> pos{b.pos.ankle, b.pos.hip, b.pos.head};
  const std::array<Vec2, 3> ref_pos{ref.keypoints.ankle, ref.keypoints.hip, ref.keypoints.head};
  const std::array<Vec2, 3> vel{b.vel.ankle, b.vel.hip, b.vel.head};
  const std::array<Vec2, 3> ref_vel{r.vel.ankle, r.vel.hip, r.vel.head};

  double body_pos = 0, body_orient = 0, body_linvel = 0, body_angvel = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    body_pos += (pos[i] - ref_pos[i]).squaredNorm();
    const double dth = env::wrap_angle(b.body_ang[i] - r.body_ang[i]);
    body_orient += dth * dth;
    body_linvel += (vel[i] - ref_vel[i]).squaredNorm();
    const double dw = b.body_angvel[i] - r.body_angvel[i];
    body_angvel += dw * dw;
  }
  const double joint = (state.q - ref.joints).squaredNorm() / 2.0;
  const double anchor_orient = env::wrap_angle(b.body_ang[1] - ref.root_ang);

  RewardTerms t;
  t.set(Term::JointPos, gauss_score(joint, w.joint_pos_sigma_sq));
  t.set(Term::BodyPos, gauss_score(body_pos / 3.0, w.body_pos_sigma_sq));
  t.set(Term::BodyOrient, gauss_score(body_orient / 3.0, w.body_orient_sigma_sq));
  t.set(Term::BodyLinVel, gauss_score(body_linvel / 3.0, w.body_linvel_sigma_sq));
  t.set(Term::BodyAngVel, gauss_score(body_angvel / 3.0, w.body_angvel_sigma_sq));
  t.set(Term::AnchorPos,
        gauss_score((b.pos.hip - ref.keypoints.hip).squaredNorm(), w.anchor_pos_sigma_sq));
  t.set(Term::AnchorOrient, gauss_score(anchor_orient * anchor_orient, w.anchor_orient_sigma_sq));
  return t;
}

double contact_reward(const std::array<int, 2>& c, const std::array<int, 2>& c_ref) {
  const int l1 = std::abs(c[0] - c_ref[0]) + std::abs(c[1] - c_ref[1]);
  return 1.0 - l1 / 2.0;
}

double balance_deficit(double com_x, double cop_x, const RewardWeights& w) {
  const double excess = std::max(std::abs(com_x - cop_x) - w.balance_threshold, 0.0);
  return 1.0 - std::exp(-excess / w.balance_divisor);
}

double balance_penalty(const Vec2& com, double cop_x, const RewardWeights& w) {
  return -w.balance * balance_deficit(com(0), cop_x, w);
}

double adaptive_weight(double d_ref, const AdaptiveWeightCfg& cfg) {
  if (std::isnan(d_ref)) return cfg.w_min;
  const double excess = std::max(0.0, d_ref - cfg.tau);
  return std::clamp(std::exp(-excess / cfg.kappa), cfg.w_min, 1.0);
}

bool is_tracked(Term t) {
  return t == Term::JointPos || t == Term::BodyPos || t == Term::AnchorPos;
}

double joint_limit_violation(const env::PtbModel& model, const Vec2& q) {
  double v = 0.0;
  for (int j = 0; j < 2; ++j) {
    v += std::max(model.joint_lower(j) - q(j), 0.0) + std::max(q(j) - model.joint_upper(j), 0.0);
  }
  return v;
}

int ground_collisions(const env::Keypoints& k) {
  return (k.hip(1) < 0.0 ? 1 : 0) + (k.head(1) < 0.0 ? 1 : 0);
}

void add_aux_terms(RewardTerms& terms, const AuxSignals& aux, const std::array<int, 2>& contacts,
                   const std::array<int, 2>& ref_contacts, double com_x, double cop_x,
                   const RewardWeights& w, const RewardFlags& flags) {
  terms.set(Term::Contact, contact_reward(contacts, ref_contacts));
  terms.set(Term::ActionSmooth, (aux.action - aux.last_action).squaredNorm());
  terms.set(Term::SelfContact, aux.ground_collisions);
  double balance = 0.0;
  if (flags.use_balance) {
    const double deficit = balance_deficit(com_x, cop_x, w);
    balance = flags.balance_sign_literal ? 1.0 - deficit : deficit;
  }
  terms.set(Term::Balance, balance);
  terms.set(Term::Termination, aux.terminated ? 1.0 : 0.0);
  terms.set(Term::JointLimit, aux.joint_limit_violation);
}

std::array<double, kNumTerms> weighted_terms(const RewardTerms& terms, double w_track,
                                             const RewardWeights& w) {
  std::array<double, kNumTerms> out{};
  for (std::size_t i = 0; i < kNumTerms; ++i) {
    const Term t = term_at(i);
    if (!terms.present[i]) throw ValidationError("total_reward: term '" + term_name(t) + "' missing");
    out[i] = w.weight(t) * terms.raw[i] * (is_tracked(t) ? w_track : 1.0);
  }
  return out;
}

double total_reward(const RewardTerms& terms, double w_track, const RewardWeights& w) {
  double sum = 0.0;
  for (double v : weighted_terms(terms, w_track, w)) sum += v;
  return sum;
}

}  // namespace fastwbc::reward
