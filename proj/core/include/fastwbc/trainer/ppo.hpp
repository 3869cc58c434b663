#pragma once

#include "fastwbc/config/run_config.hpp"
#include "fastwbc/numcore/params.hpp"
#include "fastwbc/numcore/prng.hpp"
#include "fastwbc/trainer/agent.hpp"
#include "fastwbc/trainer/rollout.hpp"

#include <optional>
#include <vector>

namespace fastwbc::trainer {

// Gathered minibatch; observations already normalized.
struct Batch {
  Matrix obs;
  Matrix critic_obs;
  Matrix actions;
  Matrix old_mean;
  Vector old_log_std;
  Vector old_logp;
  Vector advantages;
  Vector returns;
};

Batch gather(const RolloutBuffer& buf, const std::vector<std::size_t>& idx);

struct LossTerms {
  double surrogate = 0;  // -mean(min(r A, clip(r) A))
  double value = 0;      // value_coeff * mean((V - R)^2)
  double entropy = 0;    // -entropy_coeff * H
  double parseval = 0;   // lambda_p * L_Parseval (adaptation only)
  double kl = 0;         // lambda_k * mean KL(pi || pi_b) (adaptation only)
  double total = 0;
  double measured_kl = 0;  // mean KL(old || new), drives the LR rule
  double clip_fraction = 0;
  double max_ratio_dev = 0;  // max |r - 1|
};

// Gradients of the trainable parameters of a stage.
struct AgentGrads {
  policy::MoeGrads actor;
  policy::MoeGrads critic;
  Vector log_std;
  std::optional<numcore::MlpGrads> residual;

  static AgentGrads zeros_like(const Agent& a);
  void set_zero();
};

// Trainable parameters in a fixed order: Base = actor, critic, log_std;
// ResidualAdapt = residual, critic, log_std (the base actor stays frozen).
numcore::ParamList trainable_params(Agent& a, Stage stage);
numcore::ParamList trainable_grads(AgentGrads& g, Stage stage);

// Stage loss (Base: RL loss only; ResidualAdapt adds the Parseval and KL
// penalties) and, when grads is non-null, its exact gradient accumulated
// into grads.
LossTerms ppo_loss(const Agent& agent, const Batch& batch, const config::PpoConfig& cfg,
                   Stage stage, AgentGrads* grads);

// x1.5 below desired/2, /1.5 above 2 desired, clamped to [lr_min, lr_max].
double adapt_lr(double lr, double measured_kl, const config::PpoConfig& cfg);

struct UpdateStats {
  LossTerms mean;  // averaged over minibatches
  double grad_norm = 0;
  double lr = 0;
  double first_ratio_dev = 0;  // max |r - 1| on epoch 0, minibatch 0
  int skipped = 0;
};

// Epochs x minibatches of clipped-surrogate updates with adaptive LR and
// global gradient-norm clipping. Non-finite losses skip the step and halve lr.
UpdateStats ppo_update(Agent& agent, const RolloutBuffer& buf, const config::PpoConfig& cfg,
                       Stage stage, numcore::Adam& adam, double& lr, numcore::Prng& rng);

}  // namespace fastwbc::trainer
