#include "fastwbc/env/env.hpp"
#include "fastwbc/error.hpp"
#include "fastwbc/reward/reward.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace fastwbc;
using namespace fastwbc::reward;

namespace {

RewardTerms perfect_terms() {
  RewardTerms t;
  for (std::size_t i = 0; i < 7; ++i) t.set(term_at(i), 1.0);
  AuxSignals aux;
  add_aux_terms(t, aux, {1, 0}, {1, 0}, 0.0, 0.0, RewardWeights{}, RewardFlags{});
  return t;
}

motion::MotionFrame ref_at(const env::Vec2& q) {
  const env::PtbModel m;
  motion::MotionFrame f;
  f.joints = q;
  f.keypoints = env::forward_kinematics(m, q);
  f.root_pos = f.keypoints.hip;
  f.root_ang = q(0) + q(1);
  return f;
}

}  // namespace

TEST(Gauss, Examples) {
  EXPECT_EQ(gauss_score(0.0, 0.16), 1.0);
  EXPECT_NEAR(gauss_score(0.16, 0.16), std::exp(-1.0), 1e-12);
  double prev = 1.0;
  for (double e = 0.01; e < 2.0; e += 0.01) {
    const double v = gauss_score(e, 0.09);
    EXPECT_LT(v, prev);
    EXPECT_GT(v, 0.0);
    prev = v;
  }
}

TEST(Tracking, ExactTrackingScoresOne) {
  const env::PtbModel m;
  env::EnvState s;
  s.q = env::Vec2(0.1, -0.3);
  const RewardTerms t = tracking_terms(m, s, ref_at(s.q), RewardWeights{});
  for (std::size_t i = 0; i < 7; ++i) EXPECT_NEAR(t.raw[i], 1.0, 1e-12) << term_name(term_at(i));
}

TEST(Tracking, JointErrorAveragesOverJoints) {
  const env::PtbModel m;
  env::EnvState s;
  s.q = env::Vec2(0.4, 0.0);
  const RewardTerms t = tracking_terms(m, s, ref_at(env::Vec2::Zero()), RewardWeights{});
  EXPECT_NEAR(t.get(Term::JointPos), std::exp(-0.5), 1e-9);
}

TEST(Tracking, AngularVelocityErrorOnOneBody) {
  // Shank spins at 3.14 rad/s while the torso angular rate is zero.
  const env::PtbModel m;
  env::EnvState s;
  s.qd = env::Vec2(3.14, -3.14);
  const RewardTerms t = tracking_terms(m, s, ref_at(env::Vec2::Zero()), RewardWeights{});
  EXPECT_NEAR(t.get(Term::BodyAngVel), std::exp(-1.0 / 3.0), 1e-9);
}

TEST(Contact, Examples) {
  EXPECT_EQ(contact_reward({1, 0}, {1, 0}), 1.0);
  EXPECT_EQ(contact_reward({1, 0}, {0, 1}), 0.0);
  EXPECT_EQ(contact_reward({1, 1}, {1, 0}), 0.5);
}

TEST(Balance, Examples) {
  const RewardWeights w;
  EXPECT_EQ(balance_penalty({0.12, 0.5}, 0.0, w), 0.0);
  EXPECT_EQ(balance_penalty({0.0, 0.5}, 0.0, w), 0.0);
  EXPECT_NEAR(balance_penalty({0.12 + 0.0064, 0.5}, 0.0, w), -2.0 * (1.0 - std::exp(-1.0)), 1e-9);
  EXPECT_NEAR(balance_penalty({0.12 + 0.0064, 0.5}, 0.0, w), -1.2642, 1e-4);
  double prev = 0.0;
  for (double d = 0.121; d < 0.3; d += 0.001) {
    const double v = balance_penalty({d, 0.5}, 0.0, w);
    EXPECT_LT(v, prev);
    EXPECT_GT(v, -2.0 - 1e-12);
    prev = v;
  }
}

TEST(Balance, LiteralSignFlag) {
  RewardTerms t;
  RewardFlags flags;
  flags.balance_sign_literal = true;
  add_aux_terms(t, AuxSignals{}, {1, 0}, {1, 0}, 0.0, 0.0, RewardWeights{}, flags);
  EXPECT_EQ(t.get(Term::Balance), 1.0);
  flags.use_balance = false;
  add_aux_terms(t, AuxSignals{}, {1, 0}, {1, 0}, 0.5, 0.0, RewardWeights{}, flags);
  EXPECT_EQ(t.get(Term::Balance), 0.0);
}

TEST(AdaptiveWeight, Examples) {
  const AdaptiveWeightCfg cfg;
  EXPECT_EQ(adaptive_weight(0.0, cfg), 1.0);
  EXPECT_EQ(adaptive_weight(cfg.tau, cfg), 1.0);
  EXPECT_NEAR(adaptive_weight(cfg.tau + cfg.kappa, cfg), std::exp(-1.0), 1e-12);
  EXPECT_EQ(adaptive_weight(HUGE_VAL, cfg), cfg.w_min);
  EXPECT_EQ(adaptive_weight(NAN, cfg), cfg.w_min);
}

TEST(AdaptiveWeight, ContinuousAndNonIncreasing) {
  const AdaptiveWeightCfg cfg;
  double prev = 1.0;
  for (double d = 0.0; d < 1.0; d += 1e-4) {
    const double w = adaptive_weight(d, cfg);
    EXPECT_LE(w, prev);
    EXPECT_LT(prev - w, 3e-3);
    EXPECT_GE(w, cfg.w_min);
    prev = w;
  }
}

TEST(AdaptiveWeight, ConfigValidation) {
  AdaptiveWeightCfg cfg;
  cfg.kappa = 0.0;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = {};
  cfg.w_min = 1.5;
  EXPECT_THROW(cfg.validate(), ValidationError);
}

TEST(Total, PerfectTrackingSums) {
  const RewardWeights w;
  const RewardTerms t = perfect_terms();
  EXPECT_NEAR(total_reward(t, 1.0, w), 7.0, 1e-9);
  EXPECT_NEAR(total_reward(t, AdaptiveWeightCfg{}.w_min, w), 4.75, 1e-9);
}

TEST(Total, ExactlyThreeTermsAreDownWeighted) {
  const RewardWeights w;
  const RewardTerms t = perfect_terms();
  const auto full = weighted_terms(t, 1.0, w);
  const auto half = weighted_terms(t, 0.5, w);
  std::vector<std::string> scaled;
  for (std::size_t i = 0; i < kNumTerms; ++i) {
    if (full[i] != half[i]) {
      scaled.push_back(term_name(term_at(i)));
      EXPECT_NEAR(half[i], 0.5 * full[i], 1e-15);
    }
  }
  EXPECT_EQ(scaled, (std::vector<std::string>{"joint_pos", "body_pos", "anchor_pos"}));
}

TEST(Total, JointLimitPenalty) {
  const env::PtbModel m;
  const RewardWeights w;
  RewardTerms t = perfect_terms();
  AuxSignals aux;
  aux.joint_limit_violation = joint_limit_violation(m, env::Vec2(1.3, 0.0));
  EXPECT_NEAR(aux.joint_limit_violation, 0.1, 1e-12);
  add_aux_terms(t, aux, {1, 0}, {1, 0}, 0.0, 0.0, w, RewardFlags{});
  EXPECT_NEAR(total_reward(t, 1.0, w), 6.0, 1e-9);
  EXPECT_EQ(joint_limit_violation(m, env::Vec2(-1.2, 1.2)), 0.0);
}

TEST(Total, PenaltyTerms) {
  const RewardWeights w;
  RewardTerms t = perfect_terms();
  AuxSignals aux;
  aux.action = env::Vec2(1.0, 0.0);
  aux.terminated = true;
  aux.ground_collisions = 2;
  add_aux_terms(t, aux, {1, 0}, {1, 0}, 0.0, 0.0, w, RewardFlags{});
  EXPECT_NEAR(total_reward(t, 1.0, w), 7.0 - 0.1 - 0.2 - 1.0, 1e-9);
  env::Keypoints k = env::forward_kinematics(env::PtbModel{}, env::Vec2::Zero());
  EXPECT_EQ(ground_collisions(k), 0);
  k.head(1) = -0.01;
  EXPECT_EQ(ground_collisions(k), 1);
}

TEST(Total, MissingTermIsRejected) {
  RewardTerms t;
  for (std::size_t i = 0; i < 7; ++i) t.set(term_at(i), 1.0);
  EXPECT_THROW(total_reward(t, 1.0, RewardWeights{}), ValidationError);
}

TEST(Total, TaskRewardNeverExceedsSeven) {
  const env::PtbModel m;
  numcore::Prng rng(8);
  for (int k = 0; k < 200; ++k) {
    env::EnvState s;
    s.q = env::Vec2(rng.uniform(-1, 1), rng.uniform(-1, 1));
    s.qd = env::Vec2(rng.uniform(-3, 3), rng.uniform(-3, 3));
    const RewardTerms t = tracking_terms(m, s, ref_at(env::Vec2(rng.uniform(-1, 1), 0.0)), RewardWeights{});
    double task = 0;
    for (std::size_t i = 0; i < 7; ++i) {
      EXPECT_GT(t.raw[i], 0.0);
      EXPECT_LE(t.raw[i], 1.0);
      task += RewardWeights{}.weight(term_at(i)) * t.raw[i];
    }
    EXPECT_LE(task + 1.0, 7.0 + 1e-12);
  }
}
