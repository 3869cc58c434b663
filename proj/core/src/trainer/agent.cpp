#include "fastwbc/trainer/agent.hpp"

#include "fastwbc/error.hpp"

#include <cmath>

namespace fastwbc::trainer {

namespace {
constexpr double kNormEps = 1e-8;
}

RunningNorm RunningNorm::identity(std::size_t dim) {
  RunningNorm n;
  n.mean = Vector::Zero(static_cast<Eigen::Index>(dim));
  n.var = Vector::Ones(static_cast<Eigen::Index>(dim));
  return n;
}

void RunningNorm::update(const Matrix& batch) {
  if (batch.rows() != mean.size()) throw ValidationError("RunningNorm: dimension mismatch");
  const double n = static_cast<double>(batch.cols());
  if (n == 0) return;
  const Vector bmean = batch.rowwise().mean();
  const Vector bvar = (batch.colwise() - bmean).array().square().rowwise().mean();
  const double total = count + n;
  const Vector delta = bmean - mean;
  mean += delta * (n / total);
  var = (var * count + bvar * n + delta.cwiseProduct(delta) * (count * n / total)) / total;
  count = total;
}

Matrix RunningNorm::normalize(const Matrix& x) const {
  const Vector inv = (var.array() + kNormEps).rsqrt();
  return ((x.colwise() - mean).array().colwise() * inv.array()).matrix();
}

bool RunningNorm::operator==(const RunningNorm& o) const {
  return mean == o.mean && var == o.var && count == o.count;
}

std::string stage_name(Stage s) { return s == Stage::Base ? "base" : "residual_adapt"; }

Stage parse_stage(const std::string& s) {
  if (s == "base") return Stage::Base;
  if (s == "residual_adapt") return Stage::ResidualAdapt;
  throw ValidationError("unknown stage '" + s + "'");
}

Agent Agent::create(const config::ArchConfig& arch, std::size_t actor_dim,
                    std::size_t critic_dim, std::size_t act_dim, numcore::Prng& rng,
                    bool obs_norm) {
  Agent a;
  a.actor = policy::MoeNet::create(actor_dim, act_dim, arch.hidden, arch.experts, rng, arch.final_gain);
  a.critic = policy::MoeNet::create(critic_dim, 1, arch.hidden, arch.experts, rng, 1.0);
  a.head.log_std = Vector::Constant(static_cast<Eigen::Index>(act_dim), arch.init_log_std);
  a.actor_norm = RunningNorm::identity(actor_dim);
  a.critic_norm = RunningNorm::identity(critic_dim);
  a.obs_norm = obs_norm;
  return a;
}

void Agent::add_residual(const config::ArchConfig& arch, double final_gain, double parseval_s,
                         numcore::Prng& rng) {
  residual = policy::ResidualPolicy::create(actor.input_dim(), actor.output_dim(),
                                            arch.residual_hidden, rng, final_gain, parseval_s);
}

Matrix Agent::normalize_actor(const Matrix& raw) const {
  return obs_norm ? actor_norm.normalize(raw) : raw;
}

Matrix Agent::normalize_critic(const Matrix& raw) const {
  return obs_norm ? critic_norm.normalize(raw) : raw;
}

Matrix Agent::base_mean(const Matrix& obs) const { return actor.forward(obs); }

Matrix Agent::residual_mean(const Matrix& obs) const {
  if (!residual) return Matrix::Zero(static_cast<Eigen::Index>(actor.output_dim()), obs.cols());
  return numcore::mlp_forward(residual->net, obs);
}

Matrix Agent::mean(const Matrix& obs) const {
  Matrix m = base_mean(obs);
  if (residual) m += numcore::mlp_forward(residual->net, obs);
  return m;
}

Vector Agent::value(const Matrix& critic_obs) const {
  return critic.forward(critic_obs).row(0).transpose();
}

}  // namespace fastwbc::trainer
