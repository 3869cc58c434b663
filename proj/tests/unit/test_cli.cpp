#include "fastwbc/motion/clip_io.hpp"

#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace fastwbc;

namespace {

namespace fs = std::filesystem;

int run(const std::string& args) {
  const std::string cmd = std::string(FASTWBC_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Shared tiny pipeline so the subcommand tests stay fast.
class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = testkit::scratch_dir("cli");
    std::ofstream(dir_ / "tiny.ini") << "[ppo]\nn_envs = 4\nsteps_per_env = 6\nepochs = 1\nminibatches = 2\n"
                                        "iterations = 2\nhidden = 8,8\nexperts = 2\n"
                                        "[adapt]\niterations = 2\nresidual_hidden = 8,8\n"
                                        "[eval]\nsnapshot_interval = 0\nepisodes_per_clip = 1\n";
    ASSERT_EQ(run("gen-motions --preset source --out " + (dir_ / "src").string() + " --seed 1"), 0);
    ASSERT_EQ(run("train-base --motions " + (dir_ / "src").string() + " --config " + (dir_ / "tiny.ini").string() +
                  " --out " + (dir_ / "base.json").string() + " --seed 3"),
              0);
  }
  static fs::path dir_;
};
fs::path Cli::dir_;

}  // namespace

TEST_F(Cli, GenMotionsIsDeterministicAndGuarded) {
  const auto src = dir_ / "src";
  std::size_t clips = 0;
  for (const auto& e : fs::directory_iterator(src)) clips += e.path().filename() != "manifest.json";
  EXPECT_EQ(clips, 8u);
  EXPECT_TRUE(fs::exists(src / "manifest.json"));
  EXPECT_EQ(run("gen-motions --preset source --out " + src.string() + " --seed 1"), 1);
  ASSERT_EQ(run("gen-motions --preset source --out " + (dir_ / "src2").string() + " --seed 1"), 0);
  for (const auto& e : fs::directory_iterator(src)) {
    EXPECT_EQ(slurp(e.path()), slurp(dir_ / "src2" / e.path().filename())) << e.path();
  }
  ASSERT_EQ(run("gen-motions --preset aggressive --out " + (dir_ / "agg").string() + " --seed 1"), 0);
  EXPECT_NE(slurp(dir_ / "agg" / "manifest.json").find("lean_l0.400"), std::string::npos);
  EXPECT_EQ(run("gen-motions --preset bogus --out " + (dir_ / "x").string()), 1);
}

TEST_F(Cli, CurateSpeedAndClearance) {
  const auto out = dir_ / "fast";
  ASSERT_EQ(run("curate --in " + (dir_ / "src").string() + " --out " + out.string() + " --speed 2.0 --clearance 0.0"), 0);
  const auto clips = motion::read_clip_dir(out);
  ASSERT_EQ(clips.size(), 8u);
  for (const auto& c : clips) {
    EXPECT_EQ(c.size(), 200u) << c.name;
    EXPECT_TRUE(c.meta.count("height_offset"));
  }
  EXPECT_EQ(run("curate --in " + (dir_ / "src").string() + " --out " + (dir_ / "bad").string() + " --speed 5"), 1);
}

TEST_F(Cli, TrainAdaptEvalVerifyReplay) {
  const std::string cfg = " --config " + (dir_ / "tiny.ini").string();
  const std::string src = (dir_ / "src").string();
  EXPECT_TRUE(fs::exists(dir_ / "base.json.log.jsonl"));
  // The base checkpoint has no residual to verify.
  EXPECT_EQ(run("verify --ckpt " + (dir_ / "base.json").string() + " --motions " + src + " --out " +
                (dir_ / "v.json").string()),
            1);
  ASSERT_EQ(run("adapt --base " + (dir_ / "base.json").string() + " --motions " + src + cfg + " --out " +
                (dir_ / "adapted.json").string() + " --seed 3"),
            0);
  EXPECT_EQ(run("adapt --base " + (dir_ / "adapted.json").string() + " --motions " + src + cfg + " --out " +
                (dir_ / "again.json").string()),
            1);
  ASSERT_EQ(run("eval --ckpt " + (dir_ / "adapted.json").string() + " --motions " + src +
                " --mode eval_1p5m --episodes 1 --out " + (dir_ / "r.json").string()),
            0);
  const std::string report = slurp(dir_ / "r.json");
  EXPECT_NE(report.find("\"eval_1p5m\""), std::string::npos);
  EXPECT_NE(report.find("\"config\""), std::string::npos);
  ASSERT_EQ(run("eval --ckpt " + (dir_ / "adapted.json").string() + " --motions " + src +
                " --episodes 1 --out " + (dir_ / "r.csv").string()),
            0);
  EXPECT_EQ(slurp(dir_ / "r.csv").rfind("clip,", 0), 0u);
  EXPECT_EQ(run("verify --ckpt " + (dir_ / "adapted.json").string() + " --motions " + src +
                " --states 200 --pairs 200 --out " + (dir_ / "v.json").string()),
            0);
  EXPECT_NE(slurp(dir_ / "v.json").find("\"kl_bound\""), std::string::npos);
  fs::path clip;
  for (const auto& e : fs::directory_iterator(src)) {
    if (e.path().filename() != "manifest.json") clip = e.path();
  }
  ASSERT_EQ(run("replay --ckpt " + (dir_ / "adapted.json").string() + " --clip " + clip.string() + " --out " +
                (dir_ / "t.csv").string()),
            0);
  EXPECT_NE(slurp(dir_ / "t.csv").find("w_track"), std::string::npos);
}

TEST_F(Cli, ValidationErrorsExitWithOne) {
  const std::string src = (dir_ / "src").string();
  EXPECT_EQ(run("train-base --motions " + src + " --out " + (dir_ / "x.json").string() + " --set ppo.bogus=1"), 1);
  EXPECT_EQ(run("train-base --motions " + src + " --out " + (dir_ / "x.json").string() + " --set ppo.clip=2"), 1);
  std::ofstream(dir_ / "broken.json") << "{\"schema_version\": 1";
  EXPECT_EQ(run("eval --ckpt " + (dir_ / "broken.json").string() + " --motions " + src + " --out " +
                (dir_ / "y.json").string()),
            1);
  EXPECT_EQ(run("eval --ckpt " + (dir_ / "base.json").string() + " --motions " + src + " --mode sideways --out " +
                (dir_ / "y.json").string()),
            1);
  EXPECT_EQ(run("no-such-command"), 1);
}

TEST_F(Cli, HelpListsConfigKeys) {
  const auto out = dir_ / "help.txt";
  EXPECT_EQ(std::system((std::string(FASTWBC_CLI) + " --help > " + out.string() + " 2>&1").c_str()), 0);
  const std::string help = slurp(out);
  for (const auto& k : config::registry()) EXPECT_NE(help.find(k.path()), std::string::npos) << k.path();
}
