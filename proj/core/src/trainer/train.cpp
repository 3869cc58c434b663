#include "fastwbc/trainer/train.hpp"

#include "fastwbc/error.hpp"
#include "fastwbc/evalkit/eval.hpp"
#include "fastwbc/policy/gaussian_head.hpp"

#include <chrono>
#include <cmath>

namespace fastwbc::trainer {

namespace nt = numcore::tags;

struct Trainer::Slot {
  env::BalancerEnv env;
  numcore::Prng action_rng;
  std::size_t clip = 0;
  std::size_t segment = 0;
};

nlohmann::json log_to_json(const IterationLog& l) {
  nlohmann::ordered_json term;
  for (int k = 0; k < env::kNumTerminationKinds; ++k) {
    term[env::termination_name(static_cast<env::Termination>(k))] = l.terminations[static_cast<std::size_t>(k)];
  }
  const LossTerms& m = l.update.mean;
  nlohmann::ordered_json j;
  j["iteration"] = l.iteration;
  j["stage"] = stage_name(l.stage);
  j["mean_reward"] = l.mean_reward;
  j["episodes"] = l.episodes;
  j["successes"] = l.successes;
  j["terminations"] = term;
  j["loss"] = {{"surrogate", m.surrogate}, {"value", m.value},       {"entropy", m.entropy},
               {"parseval", m.parseval},   {"kl_penalty", m.kl},     {"total", m.total}};
  j["kl"] = m.measured_kl;
  j["clip_fraction"] = m.clip_fraction;
  j["lr"] = l.update.lr;
  j["grad_norm"] = l.update.grad_norm;
  j["skipped"] = l.update.skipped;
  j["sampler_updated"] = l.sampler_updated;
  j["succ"] = l.succ ? nlohmann::ordered_json(*l.succ) : nlohmann::ordered_json(nullptr);
  j["seconds"] = l.seconds;
  return nlohmann::json::parse(j.dump());
}

Trainer::Trainer(const motion::MotionLibrary& lib, const config::RunConfig& cfg, std::uint64_t seed)
    : lib_(&lib), cfg_(cfg), seed_(seed) {
  if (lib.clips.empty()) throw ValidationError("training needs a non-empty motion library");
  cfg_.validate();
}

Trainer::~Trainer() = default;

Trainer::Trainer(Agent agent, const motion::MotionLibrary& lib, const config::RunConfig& cfg,
                 std::uint64_t seed)
    : Trainer(lib, cfg, seed) {
  agent_ = std::move(agent);
  stage_ = agent_.stage();
  frozen_actor_ = agent_.actor;
  sampler_ = SamplerState::create(lib, cfg_.sampler.floor);
  sampler_rng_ = numcore::Prng(numcore::Prng::sub_seed(seed, nt::kSampler));
  shuffle_rng_ = numcore::Prng(numcore::Prng::sub_seed(seed, nt::kShuffle));
  lr_ = cfg_.ppo.lr_init;
  const std::uint64_t base = numcore::Prng::sub_seed(seed, nt::kEnv);
  for (std::size_t e = 0; e < cfg_.ppo.n_envs; ++e) {
    slots_.push_back(std::unique_ptr<Slot>(
        new Slot{env::BalancerEnv(cfg_.env, base + 2 * e), numcore::Prng(base + 2 * e + 1), 0, 0}));
  }
  for (std::size_t e = 0; e < slots_.size(); ++e) assign(e);
}

Trainer Trainer::resume(const Checkpoint& ckpt, const motion::MotionLibrary& lib) {
  if (!ckpt.runtime) throw ValidationError("checkpoint carries no runtime state to resume from");
  const RuntimeState& rt = *ckpt.runtime;
  Trainer t(lib, ckpt.config, ckpt.seed);
  if (rt.envs.size() != t.cfg_.ppo.n_envs) {
    throw ValidationError("checkpoint runtime has " + std::to_string(rt.envs.size()) +
                          " environments, config expects " + std::to_string(t.cfg_.ppo.n_envs));
  }
  if (rt.sampler.num_clips() != lib.clips.size()) {
    throw ValidationError("checkpoint sampler does not match the motion library");
  }
  t.agent_ = ckpt.agent;
  t.stage_ = t.agent_.stage();
  t.frozen_actor_ = t.agent_.actor;
  t.sampler_ = rt.sampler;
  t.sampler_rng_ = numcore::Prng::from_state(rt.sampler_rng);
  t.shuffle_rng_ = numcore::Prng::from_state(rt.shuffle_rng);
  t.adam_ = rt.adam;
  t.lr_ = rt.lr;
  t.iteration_ = ckpt.iteration;
  for (const auto& s : rt.envs) {
    if (s.clip >= lib.clips.size()) throw ValidationError("checkpoint env refers to a missing clip");
    auto slot = std::unique_ptr<Slot>(new Slot{env::BalancerEnv(t.cfg_.env, 0),
                                               numcore::Prng::from_state(s.action_rng), s.clip, s.segment});
    slot->env.restore(s.env, lib.clips[s.clip]);
    t.slots_.push_back(std::move(slot));
  }
  return t;
}

void Trainer::assign(std::size_t e) {
  Slot& s = *slots_[e];
  const auto [clip, seg] = sampler_.sample(sampler_rng_);
  s.clip = clip;
  s.segment = seg;
  s.env.reset(lib_->clips[clip], sampler_.segments[clip][seg].first);
  sampler_.record_attempt(clip, seg);
}

void Trainer::collect(RolloutBuffer& buf, IterationLog& log) {
  const std::size_t n = slots_.size();
  const bool update_norm = agent_.obs_norm && stage_ == Stage::Base;
  const double gamma = cfg_.ppo.gamma;
  Matrix a_raw(static_cast<Eigen::Index>(env::kActorObsDim), static_cast<Eigen::Index>(n));
  Matrix c_raw(static_cast<Eigen::Index>(env::kCriticObsDim), static_cast<Eigen::Index>(n));
  buf.old_log_std = agent_.head.log_std;
  double reward_sum = 0;

  for (std::size_t t = 0; t < buf.steps; ++t) {
    for (std::size_t e = 0; e < n; ++e) {
      a_raw.col(static_cast<Eigen::Index>(e)) = slots_[e]->env.actor_obs();
      c_raw.col(static_cast<Eigen::Index>(e)) = slots_[e]->env.critic_obs();
    }
    if (!a_raw.allFinite() || !c_raw.allFinite()) {
      throw NumericalError("non-finite observation during rollout at iteration " +
                           std::to_string(iteration_));
    }
    if (update_norm) {
      agent_.actor_norm.update(a_raw);
      agent_.critic_norm.update(c_raw);
    }
    const Matrix a_obs = agent_.normalize_actor(a_raw);
    const Matrix c_obs = agent_.normalize_critic(c_raw);
    const Matrix mean = agent_.mean(a_obs);
    const Vector values = agent_.value(c_obs);

    for (std::size_t e = 0; e < n; ++e) {
      Slot& s = *slots_[e];
      const std::size_t col = buf.index(t, e);
      const auto ce = static_cast<Eigen::Index>(e);
      const auto [action, logp] = policy::sample_and_logprob(mean.col(ce), agent_.head, s.action_rng);
      buf.actor_obs.col(static_cast<Eigen::Index>(col)) = a_obs.col(ce);
      buf.critic_obs.col(static_cast<Eigen::Index>(col)) = c_obs.col(ce);
      buf.actions.col(static_cast<Eigen::Index>(col)) = action;
      buf.old_mean.col(static_cast<Eigen::Index>(col)) = mean.col(ce);
      buf.logp(static_cast<Eigen::Index>(col)) = logp;
      buf.values(static_cast<Eigen::Index>(col)) = values(ce);
      buf.clip_ids[col] = s.clip;
      buf.segment_ids[col] = s.segment;

      const env::StepResult r = s.env.step(action);
      double reward = cfg_.ppo.reward_scale * r.reward;
      if (r.success) {
        // Reaching the end of the clip is a time limit, not a terminal state.
        const Matrix final_obs = agent_.normalize_critic(s.env.critic_obs());
        reward += gamma * agent_.value(final_obs)(0);
      }
      buf.rewards(static_cast<Eigen::Index>(col)) = reward;
      buf.dones[col] = r.done ? 1 : 0;
      buf.kinds[col] = r.termination;
      reward_sum += r.reward;

      if (r.termination != env::Termination::None) {
        ++log.terminations[static_cast<std::size_t>(r.termination)];
        sampler_.record_failure(s.clip, sampler_.segment_of(s.clip, s.env.state().frame_idx));
      }
      if (r.done) {
        ++log.episodes;
        if (r.success) ++log.successes;
        assign(e);
      } else {
        const std::size_t seg = sampler_.segment_of(s.clip, s.env.state().frame_idx);
        if (seg != s.segment) {
          s.segment = seg;
          sampler_.record_attempt(s.clip, seg);
        }
      }
    }
  }
  for (std::size_t e = 0; e < n; ++e) {
    c_raw.col(static_cast<Eigen::Index>(e)) = slots_[e]->env.critic_obs();
  }
  buf.last_values = agent_.value(agent_.normalize_critic(c_raw));
  log.mean_reward = reward_sum / static_cast<double>(buf.capacity());
}

IterationLog Trainer::iterate() {
  const auto start = std::chrono::steady_clock::now();
  IterationLog log;
  log.iteration = iteration_ + 1;
  log.stage = stage_;
  RolloutBuffer buf(slots_.size(), cfg_.ppo.steps_per_env, env::kActorObsDim, env::kCriticObsDim, 2);
  collect(buf, log);
  if (!std::isfinite(log.mean_reward)) {
    throw NumericalError("mean reward is not finite at iteration " + std::to_string(log.iteration));
  }
  compute_gae(buf, cfg_.ppo.gamma, cfg_.ppo.gae_lambda);
  if (cfg_.ppo.adv_norm) normalize_advantages(buf);
  log.update = ppo_update(agent_, buf, cfg_.ppo, stage_, adam_, lr_, shuffle_rng_);
  ++iteration_;
  if (cfg_.sampler.adaptive && iteration_ % cfg_.sampler.update_interval == 0) {
    update_sampler(sampler_);
    for (std::size_t e = 0; e < slots_.size(); ++e) assign(e);
    log.sampler_updated = true;
  }
  log.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return log;
}

Checkpoint Trainer::checkpoint() const {
  if (stage_ == Stage::ResidualAdapt && !(agent_.actor == frozen_actor_)) {
    throw NumericalError("base actor parameters changed during residual adaptation");
  }
  Checkpoint c;
  c.agent = agent_;
  c.config = cfg_;
  c.seed = seed_;
  c.iteration = iteration_;
  RuntimeState rt;
  for (const auto& s : slots_) {
    rt.envs.push_back({s->env.snapshot(), s->action_rng.state(), s->clip, s->segment});
  }
  rt.sampler = sampler_;
  rt.sampler_rng = sampler_rng_.state();
  rt.shuffle_rng = shuffle_rng_.state();
  rt.adam = adam_;
  rt.lr = lr_;
  c.runtime = std::move(rt);
  return c;
}

TrainResult run_training(Trainer& trainer, int iterations, std::ostream* log) {
  const config::RunConfig& cfg = trainer.config();
  TrainResult result;
  result.checkpoint = trainer.checkpoint();
  for (int i = 0; i < iterations; ++i) {
    IterationLog l;
    try {
      l = trainer.iterate();
    } catch (const NumericalError& e) {
      result.diverged = true;
      if (log) *log << nlohmann::json{{"iteration", trainer.iteration() + 1}, {"error", e.what()}}.dump() << '\n';
      return result;
    }
    const bool last = i + 1 == iterations;
    const int every = cfg.eval.snapshot_interval;
    if (every > 0 && (trainer.iteration() % every == 0 || last)) {
      const evalkit::MetricsReport rep =
          evalkit::run_eval(trainer.agent(), trainer.library(), cfg, env::EvalMode::Train,
                            cfg.eval.snapshot_episodes, trainer.seed());
      l.succ = rep.aggregate.succ.mean;
    }
    if (log) *log << log_to_json(l).dump() << '\n' << std::flush;
    result.checkpoint = trainer.checkpoint();
    if (cfg.ppo.stop_succ > 0 && l.succ && *l.succ >= cfg.ppo.stop_succ) {
      result.stopped_early = !last;
      break;
    }
  }
  return result;
}

TrainResult train_base(const motion::MotionLibrary& lib, const config::RunConfig& cfg,
                       std::uint64_t seed, std::ostream* log) {
  numcore::Prng rng(numcore::Prng::sub_seed(seed, nt::kInit));
  Agent agent = Agent::create(cfg.arch, env::kActorObsDim, env::kCriticObsDim, 2, rng, cfg.ppo.obs_norm);
  Trainer trainer(std::move(agent), lib, cfg, seed);
  return run_training(trainer, cfg.ppo.iterations, log);
}

TrainResult adapt_residual(const Checkpoint& base, const motion::MotionLibrary& lib,
                           const config::RunConfig& cfg, std::uint64_t seed, std::ostream* log) {
  if (base.stage() != Stage::Base) {
    throw ValidationError("adapt expects a base checkpoint, got stage '" + stage_name(base.stage()) + "'");
  }
  const Agent& b = base.agent;
  if (b.actor.experts.size() != cfg.arch.experts) {
    throw ValidationError("architecture mismatch: checkpoint has " + std::to_string(b.actor.experts.size()) +
                          " experts, config has " + std::to_string(cfg.arch.experts));
  }
  for (const auto& e : b.actor.experts) {
    std::vector<std::size_t> hidden;
    for (std::size_t l = 0; l + 1 < e.num_layers(); ++l) hidden.push_back(static_cast<std::size_t>(e.weights[l].rows()));
    if (hidden != cfg.arch.hidden) throw ValidationError("architecture mismatch: hidden layer widths differ");
  }
  Agent agent = b;
  numcore::Prng rng(numcore::Prng::sub_seed(seed, nt::kInit));
  agent.add_residual(cfg.arch, cfg.adapt.residual_final_gain, cfg.ppo.parseval_s, rng);
  Trainer trainer(std::move(agent), lib, cfg, seed);
  return run_training(trainer, cfg.adapt.iterations, log);
}

}  // namespace fastwbc::trainer
