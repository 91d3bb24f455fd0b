#include "cli.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "symphony/checkpoint.hpp"
#include "symphony/io.hpp"

namespace {

namespace fs = std::filesystem;
namespace cli = symphony::cli;
using symphony::RunConfig;
using symphony::Variant;
using symphony::VariantConfig;

int run_cli(std::vector<std::string> args) {
  std::vector<char*> argv;
  args.insert(args.begin(), "symphony");
  for (auto& a : args) argv.push_back(a.data());
  return cli::run_main(static_cast<int>(argv.size()), argv.data());
}

std::string temp_dir(const std::string& name) {
  const std::string dir = ::testing::TempDir() + name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

RunConfig desk_run(const std::string& out_dir, std::uint64_t seed = 3) {
  RunConfig config;
  config.algo = VariantConfig::preset(Variant::kS3);
  config.algo.n_exp = 64;
  config.algo.repeats = 4;
  config.algo.h_dim = 16;
  config.algo.n_out = 4;
  config.env_name = "pendulum";
  config.seed = seed;
  config.total_steps = 64 + 420;
  config.out_dir = out_dir;
  config.checkpoint_every = 200;
  return config;
}

TEST(CmdTrain, WritesMetricsCheckpointsAndSummary) {
  const std::string dir = temp_dir("cli_train");
  EXPECT_EQ(cli::cmd_train(desk_run(dir)), cli::kExitOk);

  const std::string metrics = symphony::read_file(dir + "/metrics.csv");
  EXPECT_NE(metrics.find("step,episode,return"), std::string::npos);
  // > 0 episode rows after the header.
  EXPECT_GT(std::count(metrics.begin(), metrics.end(), '\n'), 1);
  EXPECT_TRUE(fs::exists(dir + "/checkpoint_latest.symc"));
  EXPECT_TRUE(fs::exists(dir + "/checkpoint_latest.frb"));
  EXPECT_TRUE(fs::exists(dir + "/summary.txt"));
}

TEST(CmdTrain, ByteIdenticalMetricsAcrossReruns) {
  const std::string dir_a = temp_dir("cli_det_a");
  const std::string dir_b = temp_dir("cli_det_b");
  ASSERT_EQ(cli::cmd_train(desk_run(dir_a, 7)), cli::kExitOk);
  ASSERT_EQ(cli::cmd_train(desk_run(dir_b, 7)), cli::kExitOk);
  EXPECT_EQ(symphony::read_file(dir_a + "/metrics.csv"),
            symphony::read_file(dir_b + "/metrics.csv"));
  EXPECT_EQ(symphony::read_file(dir_a + "/checkpoint_latest.symc"),
            symphony::read_file(dir_b + "/checkpoint_latest.symc"));
}

TEST(CmdTrain, InvalidConfigRejected) {
  RunConfig config = desk_run(temp_dir("cli_bad"));
  config.algo.n_exp = 0;
  EXPECT_EQ(cli::cmd_train(config), cli::kExitUsage);
}

TEST(CmdEval, StatsFromTrainedCheckpoint) {
  const std::string dir = temp_dir("cli_eval");
  ASSERT_EQ(cli::cmd_train(desk_run(dir)), cli::kExitOk);
  const std::string csv = dir + "/eval_stats.csv";
  EXPECT_EQ(cli::cmd_eval(dir + "/checkpoint_latest.symc", "pendulum", 5, 3,
                          csv, false),
            cli::kExitOk);
  const std::string text = symphony::read_file(csv);
  EXPECT_NE(text.find("episodes,mean,stddev,min,max\n"), std::string::npos);
  EXPECT_NE(text.find("5,"), std::string::npos);
}

TEST(CmdEval, MissingFileDistinctFromCorrupt) {
  EXPECT_EQ(cli::cmd_eval("/nonexistent/x.symc", "pendulum", 3, 0, "", false),
            cli::kExitIo);

  const std::string dir = temp_dir("cli_corrupt");
  const std::string bad = dir + "/bad.symc";
  std::ofstream(bad, std::ios::binary) << "NOTACHECKPOINT____";
  EXPECT_EQ(cli::cmd_eval(bad, "pendulum", 3, 0, "", false),
            cli::kExitInvariant);
}

TEST(CmdVerify, PassesAndWritesReport) {
  const std::string dir = temp_dir("cli_verify");
  EXPECT_EQ(cli::cmd_verify(dir), cli::kExitOk);
  const std::string report = symphony::read_file(dir + "/report.txt");
  EXPECT_NE(report.find("PASS finite_diff.rehse"), std::string::npos);
  EXPECT_NE(report.find("PASS omega_tanh_identity"), std::string::npos);
  EXPECT_NE(report.find("PASS schedule.buffer"), std::string::npos);
  EXPECT_NE(report.find("PASS swaddling_beta_match"), std::string::npos);
  EXPECT_EQ(report.find("FAIL"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir + "/functions/resine.csv"));
  EXPECT_TRUE(fs::exists(dir + "/schedules/buffer_384.csv"));
  EXPECT_TRUE(fs::exists(dir + "/schedules/target_critic_dimpled_384.csv"));
}

TEST(CmdInspect, PrintsHeaderAndNorms) {
  const std::string dir = temp_dir("cli_inspect");
  ASSERT_EQ(cli::cmd_train(desk_run(dir)), cli::kExitOk);
  EXPECT_EQ(cli::cmd_inspect(dir + "/checkpoint_latest.symc"), cli::kExitOk);
  EXPECT_EQ(cli::cmd_inspect("/nonexistent.symc"), cli::kExitIo);
}

TEST(RunMain, SubcommandParsingAndExitCodes) {
  EXPECT_EQ(run_cli({"definitely-not-a-command"}), cli::kExitUsage);
  EXPECT_EQ(run_cli({"train"}), cli::kExitUsage);  // --steps is required
  EXPECT_EQ(run_cli({"train", "--steps", "10", "--variant", "zz"}),
            cli::kExitUsage);
}

TEST(RunMain, TrainFlagsReachTheTrainer) {
  const std::string dir = temp_dir("cli_flags");
  // Desk-scaled ED: header must reflect h_dim 384 and n_out 96 (B = 288).
  EXPECT_EQ(run_cli({"train", "--variant", "ed", "--env", "pendulum",
                     "--steps", "100", "--seed", "5", "--out", dir, "--n-exp",
                     "96", "--repeats", "4", "--eval-every", "0"}),
            cli::kExitOk);
  // Exploration (96) + 4 steps of training produce a checkpoint on exit.
  ASSERT_TRUE(fs::exists(dir + "/checkpoint_latest.symc"));
  const auto header =
      symphony::inspect_checkpoint(dir + "/checkpoint_latest.symc", nullptr);
  EXPECT_EQ(header.h_dim, 384u);
  EXPECT_EQ(header.n_out, 96u);
  EXPECT_EQ(header.variant, Variant::kED);
}

TEST(RunMain, ConfigFilePrecedence) {
  const std::string dir = temp_dir("cli_cfgfile");
  const std::string cfg = dir + "/run.cfg";
  std::ofstream(cfg) << "# config file\n"
                     << "[run]\n"
                     << "variant = s2\n"
                     << "[replay]\n"
                     << "n_exp = 80\n"
                     << "repeats = 3\n"
                     << "[nets]\n"
                     << "h_dim = 16\n"
                     << "n_out = 4\n"
                     << "[optim]\n"
                     << "lr = 2e-4\n";
  // Flag --lr overrides the file; file overrides the s2 preset.
  EXPECT_EQ(run_cli({"train", "--config", cfg, "--steps", "90", "--seed", "1",
                     "--out", dir + "/out", "--lr", "3e-4"}),
            cli::kExitOk);
  const auto header = symphony::inspect_checkpoint(
      dir + "/out/checkpoint_latest.symc", nullptr);
  EXPECT_EQ(header.variant, Variant::kS2);  // from the file
  EXPECT_EQ(header.h_dim, 16u);             // file override of the preset
}

TEST(ConfigFile, ParserHandlesSectionsCommentsAndErrors) {
  const std::string dir = temp_dir("cli_parse");
  const std::string good = dir + "/good.cfg";
  std::ofstream(good) << "top = 1\n[a]\nx = 2 # trailing comment\n\n[b]\ny=3\n";
  const auto values = symphony::parse_config_file(good);
  EXPECT_EQ(values.at("top"), "1");
  EXPECT_EQ(values.at("a.x"), "2");
  EXPECT_EQ(values.at("b.y"), "3");

  const std::string bad = dir + "/bad.cfg";
  std::ofstream(bad) << "[a]\nnovalue\n";
  EXPECT_THROW(symphony::parse_config_file(bad), symphony::FormatError);

  RunConfig config;
  EXPECT_THROW(symphony::apply_config_values(config, {{"bogus.key", "1"}}),
               std::invalid_argument);
}

TEST(CmdTrain, ResumeFlagContinuesRun) {
  const std::string dir = temp_dir("cli_resume");
  RunConfig first = desk_run(dir);
  first.total_steps = 64 + 100;
  ASSERT_EQ(cli::cmd_train(first), cli::kExitOk);

  RunConfig more = first;
  more.total_steps = 64 + 180;
  more.resume_from = dir + "/checkpoint_latest.symc";
  more.out_dir = dir + "/resumed";
  ASSERT_EQ(cli::cmd_train(more), cli::kExitOk);
  const std::string summary = symphony::read_file(dir + "/resumed/summary.txt");
  EXPECT_NE(summary.find("steps 244"), std::string::npos);
}

}  // namespace
