#include "fastwbc/config/run_config.hpp"
#include "fastwbc/error.hpp"
#include "fastwbc/evalkit/eval.hpp"
#include "fastwbc/motion/clip_io.hpp"
#include "fastwbc/motion/curation.hpp"
#include "fastwbc/motion/generators.hpp"
#include "fastwbc/trainer/checkpoint.hpp"
#include "fastwbc/trainer/train.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace fastwbc;

namespace {

// Shared --config / --set handling: file values first, then overrides.
struct ConfigArgs {
  std::string file;
  std::vector<std::string> sets;

  void attach(CLI::App* app) {
    app->add_option("--config", file, "INI-style config file")->check(CLI::ExistingFile);
    app->add_option("--set", sets, "Override a config key, e.g. --set ppo.iterations=200");
  }

  config::RunConfig resolve() const {
    config::RunConfig cfg;
    if (!file.empty()) config::apply_config_file(cfg, file);
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ValidationError("--set expects section.key=value, got '" + s + "'");
      config::set_value(cfg, s.substr(0, eq), s.substr(eq + 1));
    }
    cfg.validate();
    return cfg;
  }
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw ValidationError("failed writing '" + path.string() + "'");
}

motion::MotionLibrary load_library(const fs::path& dir, const config::RunConfig& cfg) {
  std::vector<std::string> warnings;
  motion::MotionLibrary lib;
  lib.clips = motion::read_clip_dir(dir, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
  lib.clip_len = cfg.sampler.clip_len;
  lib.validate();
  return lib;
}

void prepare_out_dir(const fs::path& dir, bool force) {
  if (fs::exists(dir)) {
    if (!fs::is_directory(dir)) throw ValidationError("'" + dir.string() + "' exists and is not a directory");
    if (!fs::is_empty(dir) && !force) {
      throw ValidationError("output directory '" + dir.string() + "' is not empty (use --force)");
    }
  }
  fs::create_directories(dir);
}

std::string clip_file(std::size_t i, const std::string& name) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%03zu_", i);
  return buf + name + ".json";
}

void write_library(const std::vector<motion::MotionClip>& clips, const fs::path& dir,
                   nlohmann::json manifest) {
  nlohmann::json list = nlohmann::json::array();
  for (std::size_t i = 0; i < clips.size(); ++i) {
    const std::string file = clip_file(i, clips[i].name);
    motion::write_clip(clips[i], dir / file);
    list.push_back({{"file", file},
                    {"name", clips[i].name},
                    {"frames", clips[i].size()},
                    {"duration", clips[i].duration()},
                    {"tags", clips[i].tags}});
  }
  manifest["clips"] = list;
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

std::string format_for(const fs::path& out, const std::string& requested) {
  if (!requested.empty()) return requested;
  return out.extension() == ".csv" ? "csv" : "json";
}

int run(int argc, char** argv) {
  CLI::App app{"fastwbc: motion tracking with a mixture-of-experts base policy and residual adaptation"};
  app.require_subcommand(1);
  app.footer(config::help_text());

  // gen-motions
  auto* gen = app.add_subcommand("gen-motions", "Write a preset clip family and manifest");
  std::string preset = "source";
  fs::path gen_out;
  std::uint64_t gen_seed = 1;
  bool force = false;
  gen->add_option("--preset", preset, "source | target | aggressive")->capture_default_str();
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--seed", gen_seed, "Generator seed")->capture_default_str();
  gen->add_flag("--force", force, "Allow writing into a non-empty directory");

  // curate
  auto* cur = app.add_subcommand("curate", "Augment, height-adjust and annotate clips");
  fs::path cur_in, cur_out;
  std::optional<double> speed, clearance;
  std::string perturb;
  double contact_thresh = motion::kDefaultContactThreshold;
  bool cur_force = false;
  cur->add_option("--in", cur_in, "Input clip directory")->required()->check(CLI::ExistingDirectory);
  cur->add_option("--out", cur_out, "Output directory")->required();
  cur->add_option("--speed", speed, "Time-scale factor in [0.5, 2]");
  cur->add_option("--perturb", perturb, "j,delta: joint offset with -delta/2 on the other joint");
  cur->add_option("--clearance", clearance, "Target 25th-percentile foot height (m)");
  cur->add_option("--contact-thresh", contact_thresh, "Contact height threshold (m)")->capture_default_str();
  cur->add_flag("--force", cur_force, "Allow writing into a non-empty directory");

  // train-base
  auto* tb = app.add_subcommand("train-base", "Train the mixture-of-experts base policy");
  ConfigArgs tb_cfg;
  fs::path tb_motions, tb_out, tb_log;
  std::uint64_t tb_seed = 0;
  tb_cfg.attach(tb);
  tb->add_option("--motions", tb_motions, "Clip directory")->required()->check(CLI::ExistingDirectory);
  tb->add_option("--out", tb_out, "Checkpoint path")->required();
  tb->add_option("--seed", tb_seed, "Run seed")->capture_default_str();
  tb->add_option("--log", tb_log, "Training log (JSON lines); default <out>.log.jsonl");

  // adapt
  auto* ad = app.add_subcommand("adapt", "Train a residual on top of a frozen base checkpoint");
  ConfigArgs ad_cfg;
  fs::path ad_base, ad_motions, ad_out, ad_log;
  std::uint64_t ad_seed = 0;
  ad_cfg.attach(ad);
  ad->add_option("--base", ad_base, "Base checkpoint")->required()->check(CLI::ExistingFile);
  ad->add_option("--motions", ad_motions, "Clip directory")->required()->check(CLI::ExistingDirectory);
  ad->add_option("--out", ad_out, "Checkpoint path")->required();
  ad->add_option("--seed", ad_seed, "Run seed")->capture_default_str();
  ad->add_option("--log", ad_log, "Training log (JSON lines); default <out>.log.jsonl");

  // eval
  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a clip directory");
  ConfigArgs ev_cfg;
  fs::path ev_ckpt, ev_motions, ev_out;
  std::string ev_mode, ev_format;
  std::optional<int> ev_episodes;
  std::uint64_t ev_seed = 0;
  ev_cfg.attach(ev);
  ev->add_option("--ckpt", ev_ckpt, "Checkpoint")->required()->check(CLI::ExistingFile);
  ev->add_option("--motions", ev_motions, "Clip directory")->required()->check(CLI::ExistingDirectory);
  ev->add_option("--mode", ev_mode, "train | eval_2m | eval_1p5m (default eval.mode)");
  ev->add_option("--episodes", ev_episodes, "Episodes per clip (default eval.episodes_per_clip)");
  ev->add_option("--out", ev_out, "Report path")->required();
  ev->add_option("--format", ev_format, "json | csv (default from extension)");
  ev->add_option("--seed", ev_seed, "Evaluation seed")->capture_default_str();

  // verify
  auto* ve = app.add_subcommand("verify", "Check the Lipschitz and residual-norm bounds of an adapted checkpoint");
  ConfigArgs ve_cfg;
  fs::path ve_ckpt, ve_motions, ve_out;
  std::size_t ve_states = 10000;
  int ve_pairs = 10000;
  std::uint64_t ve_seed = 0;
  ve_cfg.attach(ve);
  ve->add_option("--ckpt", ve_ckpt, "Adapted checkpoint")->required()->check(CLI::ExistingFile);
  ve->add_option("--motions", ve_motions, "Clip directory for rollout states")->required()->check(CLI::ExistingDirectory);
  ve->add_option("--out", ve_out, "Report path (JSON)")->required();
  ve->add_option("--states", ve_states, "Rollout states")->capture_default_str();
  ve->add_option("--pairs", ve_pairs, "Random input pairs for the Lipschitz estimate")->capture_default_str();
  ve->add_option("--seed", ve_seed, "Seed")->capture_default_str();

  // replay
  auto* rp = app.add_subcommand("replay", "Roll out one clip and write a per-step CSV");
  ConfigArgs rp_cfg;
  fs::path rp_ckpt, rp_clip, rp_out;
  std::string rp_mode;
  std::uint64_t rp_seed = 0;
  rp_cfg.attach(rp);
  rp->add_option("--ckpt", rp_ckpt, "Checkpoint")->required()->check(CLI::ExistingFile);
  rp->add_option("--clip", rp_clip, "Clip file")->required()->check(CLI::ExistingFile);
  rp->add_option("--out", rp_out, "CSV path")->required();
  rp->add_option("--mode", rp_mode, "train | eval_2m | eval_1p5m (default eval.mode)");
  rp->add_option("--seed", rp_seed, "Seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (*gen) {
    const motion::Preset p = motion::parse_preset(preset);
    prepare_out_dir(gen_out, force);
    const auto clips = motion::make_preset(p, gen_seed);
    write_library(clips, gen_out, {{"preset", motion::preset_name(p)}, {"seed", gen_seed}});
    std::cout << "wrote " << clips.size() << " clips to " << gen_out.string() << '\n';
    return 0;
  }

  if (*cur) {
    std::optional<std::pair<std::size_t, double>> pert;
    if (!perturb.empty()) {
      const auto comma = perturb.find(',');
      if (comma == std::string::npos) throw ValidationError("--perturb expects j,delta");
      try {
        const long j = std::stol(perturb.substr(0, comma));
        const double d = std::stod(perturb.substr(comma + 1));
        if (j < 0 || j > 1) throw ValidationError("--perturb joint must be 0 (ankle) or 1 (hip)");
        pert = {{static_cast<std::size_t>(j), d}};
      } catch (const std::logic_error&) {
        throw ValidationError("--perturb expects j,delta, got '" + perturb + "'");
      }
    }
    const env::PtbModel model;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(cur_in)) {
      if (entry.path().extension() == ".json" && entry.path().filename() != "manifest.json") {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
    std::vector<motion::MotionClip> done;
    for (const auto& f : files) {
      try {
        motion::MotionClip c = motion::read_clip(f);
        if (speed) c = motion::augment_speed(c, *speed, model);
        if (pert) c = motion::augment_joint_perturb(c, pert->first, pert->second, {1 - pert->first}, model);
        c = motion::fk_fill(c, model);
        if (clearance) c = motion::adjust_height(c, *clearance);
        c = motion::extract_com_cop(c, model);
        c = motion::estimate_contacts(c, contact_thresh);
        done.push_back(std::move(c));
      } catch (const ValidationError& e) {
        std::cerr << "skipping " << f.string() << ": " << e.what() << '\n';
      }
    }
    if (done.empty()) throw ValidationError("no clip in '" + cur_in.string() + "' could be curated");
    prepare_out_dir(cur_out, cur_force);
    nlohmann::json manifest = {{"source", cur_in.string()}, {"contact_thresh", contact_thresh}};
    if (speed) manifest["speed"] = *speed;
    if (pert) manifest["perturb"] = {{"joint", pert->first}, {"delta", pert->second}};
    if (clearance) manifest["clearance"] = *clearance;
    write_library(done, cur_out, manifest);
    std::cout << "curated " << done.size() << " of " << files.size() << " clips\n";
    return 0;
  }

  if (*tb || *ad) {
    const bool base = tb->parsed();
    const config::RunConfig cfg = (base ? tb_cfg : ad_cfg).resolve();
    const motion::MotionLibrary lib = load_library(base ? tb_motions : ad_motions, cfg);
    const fs::path out = base ? tb_out : ad_out;
    fs::path log_path = base ? tb_log : ad_log;
    if (log_path.empty()) log_path = out.string() + ".log.jsonl";
    std::ofstream log(log_path);
    if (!log) throw ValidationError("cannot open '" + log_path.string() + "' for writing");
    const trainer::TrainResult res =
        base ? trainer::train_base(lib, cfg, tb_seed, &log)
             : trainer::adapt_residual(trainer::load_checkpoint(ad_base), lib, cfg, ad_seed, &log);
    trainer::save_checkpoint(res.checkpoint, out);
    if (res.diverged) {
      throw NumericalError("training diverged after iteration " + std::to_string(res.checkpoint.iteration) +
                           "; last good checkpoint written to " + out.string());
    }
    std::cout << "wrote " << out.string() << " after " << res.checkpoint.iteration << " iterations"
              << (res.stopped_early ? " (early stop)" : "") << '\n';
    return 0;
  }

  if (*ev) {
    const trainer::Checkpoint ck = trainer::load_checkpoint(ev_ckpt);
    config::RunConfig cfg = ev_cfg.resolve();
    const motion::MotionLibrary lib = load_library(ev_motions, cfg);
    const env::EvalMode mode = env::parse_eval_mode(ev_mode.empty() ? cfg.eval.mode : ev_mode);
    const evalkit::MetricsReport rep = evalkit::run_eval(
        ck.agent, lib, cfg, mode, ev_episodes.value_or(cfg.eval.episodes_per_clip), ev_seed,
        trainer::checkpoint_id(ck));
    evalkit::emit_report(rep, format_for(ev_out, ev_format), ev_out, config::to_json(cfg));
    std::cout << "Succ " << rep.aggregate.succ.mean << "%  E_mpjpe " << rep.aggregate.mpjpe.mean
              << "  E_mpd " << rep.aggregate.mpd.mean << '\n';
    return 0;
  }

  if (*ve) {
    const trainer::Checkpoint ck = trainer::load_checkpoint(ve_ckpt);
    if (!ck.agent.residual) throw ValidationError("checkpoint '" + ve_ckpt.string() + "' has no residual policy");
    const config::RunConfig cfg = ve_cfg.resolve();
    const motion::MotionLibrary lib = load_library(ve_motions, cfg);
    const evalkit::PropositionReport rep =
        evalkit::verify_propositions(ck.agent, lib, cfg, ve_states, ve_pairs, ve_seed);
    nlohmann::json j = evalkit::propositions_to_json(rep);
    j["checkpoint_id"] = trainer::checkpoint_id(ck);
    j["seed"] = ve_seed;
    j["config"] = config::to_json(cfg);
    write_text(ve_out, j.dump(2) + "\n");
    std::cout << "lipschitz bound " << (rep.lipschitz_holds ? "holds" : "VIOLATED") << ", residual KL bound "
              << (rep.kl_bound_holds ? "holds" : "VIOLATED") << '\n';
    return rep.lipschitz_holds && rep.kl_bound_holds ? 0 : 2;
  }

  if (*rp) {
    const trainer::Checkpoint ck = trainer::load_checkpoint(rp_ckpt);
    const config::RunConfig cfg = rp_cfg.resolve();
    const motion::MotionClip clip = motion::read_clip(rp_clip);
    const env::EvalMode mode = env::parse_eval_mode(rp_mode.empty() ? cfg.eval.mode : rp_mode);
    const auto rows = evalkit::replay(ck.agent, clip, cfg, mode, rp_seed);
    evalkit::write_trajectory_csv(rows, rp_out);
    std::cout << "wrote " << rows.size() << " rows, termination " << rows.back().termination << '\n';
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
