#include "fastwbc/env/env.hpp"
#include "fastwbc/motion/generators.hpp"
#include "fastwbc/numcore/mlp.hpp"
#include "fastwbc/numcore/prng.hpp"
#include "fastwbc/policy/moe.hpp"
#include "fastwbc/policy/regularizers.hpp"
#include "fastwbc/trainer/agent.hpp"
#include "fastwbc/trainer/ppo.hpp"
#include "fastwbc/trainer/rollout.hpp"

#include <benchmark/benchmark.h>

using namespace fastwbc;
using numcore::Matrix;
using numcore::Prng;

namespace {

Matrix random_matrix(Eigen::Index r, Eigen::Index c, Prng& rng) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

const std::vector<std::size_t> kDims{env::kActorObsDim, 64, 64, 32, 2};

void BM_MlpForward(benchmark::State& state) {
  Prng rng(1);
  const auto net = numcore::MlpNet::orthogonal(kDims, rng);
  const Matrix x = random_matrix(env::kActorObsDim, state.range(0), rng);
  for (auto _ : state) benchmark::DoNotOptimize(numcore::mlp_forward(net, x));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MlpForward)->Arg(1)->Arg(256)->Arg(1536);

void BM_MlpBackward(benchmark::State& state) {
  Prng rng(2);
  const auto net = numcore::MlpNet::orthogonal(kDims, rng);
  const Matrix x = random_matrix(env::kActorObsDim, state.range(0), rng);
  numcore::MlpCache cache;
  const Matrix y = numcore::mlp_forward(net, x, &cache);
  auto grads = numcore::MlpGrads::zeros_like(net);
  for (auto _ : state) benchmark::DoNotOptimize(numcore::mlp_backward(net, cache, y, grads));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MlpBackward)->Arg(256)->Arg(1536);

void BM_MoeForward(benchmark::State& state) {
  Prng rng(3);
  const auto net = policy::MoeNet::create(env::kActorObsDim, 2, {64, 64, 32}, 4, rng, 0.01);
  const Matrix x = random_matrix(env::kActorObsDim, state.range(0), rng);
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(x));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MoeForward)->Arg(1)->Arg(256);

void BM_EnvStep(benchmark::State& state) {
  const auto clip = motion::gen_sway(0.15, 0.5, 8.0, 0.0);
  env::BalancerEnv e(env::EnvConfig{}, 4);
  e.reset(clip, 0);
  for (auto _ : state) {
    if (e.step(env::Vec2::Zero()).done) e.reset(clip, 0);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_EnvStep);

void BM_PpoLossWithGrads(benchmark::State& state) {
  Prng rng(5);
  const config::ArchConfig arch;
  trainer::Agent agent = trainer::Agent::create(arch, env::kActorObsDim, env::kCriticObsDim, 2, rng);
  agent.add_residual(arch, 0.01, 2.0, rng);
  const auto n = state.range(0);
  trainer::Batch b;
  b.obs = random_matrix(env::kActorObsDim, n, rng);
  b.critic_obs = random_matrix(env::kCriticObsDim, n, rng);
  b.old_mean = agent.mean(b.obs);
  b.old_log_std = agent.head.log_std;
  b.actions = b.old_mean + random_matrix(2, n, rng);
  b.old_logp = policy::log_prob(b.old_mean, agent.head, b.actions);
  b.advantages = random_matrix(n, 1, rng);
  b.returns = random_matrix(n, 1, rng);
  const config::PpoConfig cfg;
  auto grads = trainer::AgentGrads::zeros_like(agent);
  for (auto _ : state) {
    grads.set_zero();
    benchmark::DoNotOptimize(trainer::ppo_loss(agent, b, cfg, trainer::Stage::ResidualAdapt, &grads));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_PpoLossWithGrads)->Arg(1536);

void BM_Gae(benchmark::State& state) {
  Prng rng(6);
  trainer::RolloutBuffer buf(256, 24, env::kActorObsDim, env::kCriticObsDim, 2);
  buf.rewards = random_matrix(static_cast<Eigen::Index>(buf.capacity()), 1, rng);
  buf.values = random_matrix(static_cast<Eigen::Index>(buf.capacity()), 1, rng);
  buf.last_values = random_matrix(256, 1, rng);
  for (std::size_t i = 0; i < buf.capacity(); ++i) buf.dones[i] = rng.uniform() < 0.02;
  for (auto _ : state) {
    trainer::compute_gae(buf, 0.99, 0.95);
    benchmark::DoNotOptimize(buf.advantages.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(buf.capacity()));
}
BENCHMARK(BM_Gae);

void BM_ParsevalGrad(benchmark::State& state) {
  Prng rng(7);
  const auto res = policy::ResidualPolicy::create(env::kActorObsDim, 2, {64, 64, 32}, rng);
  for (auto _ : state) benchmark::DoNotOptimize(policy::parseval_grad(res));
}
BENCHMARK(BM_ParsevalGrad);

}  // namespace

// The packaged benchmark_main archive carries LTO bytecode from another
// compiler version, so the entry point is defined here.
BENCHMARK_MAIN();
