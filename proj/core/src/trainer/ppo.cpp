#include "fastwbc/trainer/ppo.hpp"

#include "fastwbc/error.hpp"
#include "fastwbc/policy/regularizers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fastwbc::trainer {

Batch gather(const RolloutBuffer& buf, const std::vector<std::size_t>& idx) {
  const auto n = static_cast<Eigen::Index>(idx.size());
  Batch b;
  b.obs.resize(buf.actor_obs.rows(), n);
  b.critic_obs.resize(buf.critic_obs.rows(), n);
  b.actions.resize(buf.actions.rows(), n);
  b.old_mean.resize(buf.old_mean.rows(), n);
  b.old_logp.resize(n);
  b.advantages.resize(n);
  b.returns.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto i = static_cast<Eigen::Index>(idx[static_cast<std::size_t>(k)]);
    b.obs.col(k) = buf.actor_obs.col(i);
    b.critic_obs.col(k) = buf.critic_obs.col(i);
    b.actions.col(k) = buf.actions.col(i);
    b.old_mean.col(k) = buf.old_mean.col(i);
    b.old_logp(k) = buf.logp(i);
    b.advantages(k) = buf.advantages(i);
    b.returns(k) = buf.returns(i);
  }
  b.old_log_std = buf.old_log_std;
  return b;
}

AgentGrads AgentGrads::zeros_like(const Agent& a) {
  AgentGrads g;
  g.actor = a.actor.zero_grads();
  g.critic = a.critic.zero_grads();
  g.log_std = Vector::Zero(a.head.log_std.size());
  if (a.residual) g.residual = numcore::MlpGrads::zeros_like(a.residual->net);
  return g;
}

void AgentGrads::set_zero() {
  actor.set_zero();
  critic.set_zero();
  log_std.setZero();
  if (residual) residual->set_zero();
}

numcore::ParamList trainable_params(Agent& a, Stage stage) {
  numcore::ParamList out;
  if (stage == Stage::Base) {
    a.actor.append_views(out);
  } else {
    if (!a.residual) throw ValidationError("residual stage without a residual network");
    numcore::append_views(a.residual->net, out);
  }
  a.critic.append_views(out);
  numcore::append_views(a.head.log_std, out);
  return out;
}

numcore::ParamList trainable_grads(AgentGrads& g, Stage stage) {
  numcore::ParamList out;
  if (stage == Stage::Base) {
    g.actor.append_views(out);
  } else {
    if (!g.residual) throw ValidationError("residual stage without residual gradients");
    numcore::append_views(*g.residual, out);
  }
  g.critic.append_views(out);
  numcore::append_views(g.log_std, out);
  return out;
}

LossTerms ppo_loss(const Agent& agent, const Batch& batch, const config::PpoConfig& cfg,
                   Stage stage, AgentGrads* grads) {
  const bool adapt = stage == Stage::ResidualAdapt;
  if (adapt && !agent.residual) throw ValidationError("ppo_loss: residual stage without residual");
  const Eigen::Index n = batch.obs.cols();
  if (n == 0) throw ValidationError("ppo_loss: empty batch");
  const double inv_n = 1.0 / static_cast<double>(n);

  policy::MoeCache actor_cache, critic_cache;
  numcore::MlpCache residual_cache;
  Matrix mu_r;
  Matrix mu;
  if (adapt) {
    mu = agent.actor.forward(batch.obs);
    mu_r = numcore::mlp_forward(agent.residual->net, batch.obs, grads ? &residual_cache : nullptr);
    mu += mu_r;
  } else {
    mu = agent.actor.forward(batch.obs, grads ? &actor_cache : nullptr);
  }
  const Matrix values = agent.critic.forward(batch.critic_obs, grads ? &critic_cache : nullptr);

  const Vector& log_std = agent.head.log_std;
  const Vector inv_var = (-2.0 * log_std.array()).exp();
  const Matrix diff = batch.actions - mu;
  const Vector logp = policy::log_prob(mu, agent.head, batch.actions);

  LossTerms L;
  Vector dlogp(n);
  int clipped = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = std::exp(logp(i) - batch.old_logp(i));
    const double a = batch.advantages(i);
    const double rc = std::clamp(r, 1.0 - cfg.clip, 1.0 + cfg.clip);
    const double unclipped = r * a, clipped_obj = rc * a;
    L.surrogate -= std::min(unclipped, clipped_obj) * inv_n;
    L.max_ratio_dev = std::max(L.max_ratio_dev, std::abs(r - 1.0));
    const bool flat = unclipped > clipped_obj;
    if (flat) ++clipped;
    dlogp(i) = flat ? 0.0 : -a * r * inv_n;
  }
  L.clip_fraction = clipped * inv_n;

  const Vector verr = values.row(0).transpose() - batch.returns;
  L.value = cfg.value_coeff * verr.squaredNorm() * inv_n;
  L.entropy = -cfg.entropy_coeff * policy::entropy(agent.head);

  if (adapt) {
    L.parseval = cfg.lambda_p * policy::parseval_loss(*agent.residual);
    const Vector per_state = 0.5 * (mu_r.array().square().colwise() * inv_var.array()).colwise().sum();
    L.kl = cfg.lambda_k * per_state.mean();
  }
  L.total = L.surrogate + L.value + L.entropy + L.parseval + L.kl;

  // KL(old || new) per state, averaged.
  {
    const Vector old_var = (2.0 * batch.old_log_std.array()).exp();
    const Matrix dm = batch.old_mean - mu;
    double kl = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < mu.rows(); ++j) {
        kl += log_std(j) - batch.old_log_std(j) +
              (old_var(j) + dm(j, i) * dm(j, i)) * 0.5 * inv_var(j) - 0.5;
      }
    }
    L.measured_kl = kl * inv_n;
  }

  if (!grads) return L;

  // d logp / d mu = (a - mu) / sigma^2; d logp / d log_std = (a - mu)^2 / sigma^2 - 1.
  const Matrix scaled = diff.array().colwise() * inv_var.array();
  Matrix dmu = scaled.array().rowwise() * dlogp.transpose().array();
  const Vector dlog_std_surr =
      ((diff.array().square().colwise() * inv_var.array()).rowwise() * dlogp.transpose().array())
          .rowwise()
          .sum()
          .matrix() -
      dlogp.sum() * Vector::Ones(log_std.size());
  grads->log_std += dlog_std_surr;
  grads->log_std.array() -= cfg.entropy_coeff;

  if (adapt) {
    const double c = cfg.lambda_k * inv_n;
    Matrix dmu_r = dmu + c * (mu_r.array().colwise() * inv_var.array()).matrix();
    grads->log_std -= c * (mu_r.array().square().colwise() * inv_var.array()).rowwise().sum().matrix();
    numcore::mlp_backward(agent.residual->net, residual_cache, dmu_r, *grads->residual);
    if (cfg.lambda_p != 0.0) {
      const auto pg = policy::parseval_grad(*agent.residual);
      for (std::size_t l = 0; l < pg.size(); ++l) {
        grads->residual->d_weights[l] += cfg.lambda_p * pg[l];
      }
    }
  } else {
    agent.actor.backward(actor_cache, dmu, grads->actor);
  }
  const Matrix dv = (2.0 * cfg.value_coeff * inv_n) * verr.transpose();
  agent.critic.backward(critic_cache, dv, grads->critic);
  return L;
}

double adapt_lr(double lr, double measured_kl, const config::PpoConfig& cfg) {
  if (measured_kl > 2.0 * cfg.desired_kl) {
    lr /= 1.5;
  } else if (measured_kl < 0.5 * cfg.desired_kl) {
    lr *= 1.5;
  }
  return std::clamp(lr, cfg.lr_min, cfg.lr_max);
}

UpdateStats ppo_update(Agent& agent, const RolloutBuffer& buf, const config::PpoConfig& cfg,
                       Stage stage, numcore::Adam& adam, double& lr, numcore::Prng& rng) {
  const std::size_t cap = buf.capacity();
  const std::size_t mb = static_cast<std::size_t>(cfg.minibatches);
  const std::size_t mb_size = cap / mb;
  if (mb_size == 0) throw ValidationError("ppo_update: fewer transitions than minibatches");

  AgentGrads grads = AgentGrads::zeros_like(agent);
  const numcore::ParamList params = trainable_params(agent, stage);
  const numcore::ParamList gviews = trainable_grads(grads, stage);

  UpdateStats stats;
  int count = 0;
  std::vector<std::size_t> order(cap);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    // Fisher-Yates with the trainer's shuffle stream.
    for (std::size_t i = cap; i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
    for (std::size_t m = 0; m < mb; ++m) {
      const std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(m * mb_size),
                                         order.begin() + static_cast<std::ptrdiff_t>((m + 1) * mb_size));
      const Batch batch = gather(buf, idx);
      grads.set_zero();
      const LossTerms L = ppo_loss(agent, batch, cfg, stage, &grads);
      if (epoch == 0 && m == 0) stats.first_ratio_dev = L.max_ratio_dev;
      const double gnorm = numcore::global_norm(gviews);
      if (!std::isfinite(L.total) || !std::isfinite(gnorm)) {
        ++stats.skipped;
        lr = std::max(lr * 0.5, cfg.lr_min);
        continue;
      }
      lr = adapt_lr(lr, L.measured_kl, cfg);
      if (gnorm > cfg.max_grad_norm) numcore::scale(gviews, cfg.max_grad_norm / gnorm);
      adam.step(params, gviews, lr);

      ++count;
      stats.mean.surrogate += L.surrogate;
      stats.mean.value += L.value;
      stats.mean.entropy += L.entropy;
      stats.mean.parseval += L.parseval;
      stats.mean.kl += L.kl;
      stats.mean.total += L.total;
      stats.mean.measured_kl += L.measured_kl;
      stats.mean.clip_fraction += L.clip_fraction;
      stats.grad_norm += gnorm;
    }
  }
  if (count > 0) {
    const double inv = 1.0 / count;
    for (double* v : {&stats.mean.surrogate, &stats.mean.value, &stats.mean.entropy,
                      &stats.mean.parseval, &stats.mean.kl, &stats.mean.total,
                      &stats.mean.measured_kl, &stats.mean.clip_fraction, &stats.grad_norm}) {
      *v *= inv;
    }
  }
  stats.lr = lr;
  return stats;
}

}  // namespace fastwbc::trainer
