#include "cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "symphony/checkpoint.hpp"
#include "symphony/envs.hpp"
#include "symphony/io.hpp"
#include "symphony/math_core.hpp"
#include "symphony/trainer.hpp"

namespace symphony::cli {

namespace fs = std::filesystem;

namespace {

constexpr double kE = 2.71828182845904523536;

int map_exception(const std::exception& e) {
  if (dynamic_cast<const FormatError*>(&e)) return kExitInvariant;
  if (dynamic_cast<const IoError*>(&e)) return kExitIo;
  return kExitUsage;
}

struct CheckList {
  std::ofstream report;
  bool all_passed = true;

  explicit CheckList(const std::string& path) : report(path) {}

  void record(const std::string& name, bool passed, const std::string& detail) {
    all_passed &= passed;
    const char* tag = passed ? "PASS" : "FAIL";
    report << tag << " " << name << " " << detail << "\n";
    std::printf("%s %s %s\n", tag, name.c_str(), detail.c_str());
  }
};

}  // namespace

int cmd_train(const RunConfig& config) {
  try {
    Trainer trainer(config);
    const std::int64_t episodes = trainer.run();
    std::printf("train: %lld episodes, %lld steps, metrics at %s/metrics.csv\n",
                static_cast<long long>(episodes),
                static_cast<long long>(trainer.scalars().global_step),
                config.out_dir.c_str());
    return kExitOk;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "train: %s\n", e.what());
    return map_exception(e);
  }
}

int cmd_eval(const std::string& checkpoint, const std::string& env_name,
             int episodes, std::uint64_t seed, const std::string& out_csv,
             bool sigma_one) {
  try {
    const CheckpointHeader header = inspect_checkpoint(checkpoint, nullptr);

    RunConfig config;
    config.algo = VariantConfig::preset(header.variant);
    config.algo.h_dim = static_cast<int>(header.h_dim);
    config.algo.n_out = static_cast<int>(header.n_out);
    config.algo.eval_sigma_one = sigma_one;
    config.env_name = env_name;
    config.seed = seed;

    Trainer trainer(config);
    trainer.resume_from(checkpoint, /*with_buffer=*/false);
    const EvalStats stats = trainer.evaluate(episodes);
    std::printf("eval: episodes=%d mean=%s stddev=%s min=%s max=%s\n",
                stats.episodes, format_double(stats.mean).c_str(),
                format_double(stats.stddev).c_str(),
                format_double(stats.min_return).c_str(),
                format_double(stats.max_return).c_str());
    if (!out_csv.empty()) {
      std::ofstream out(out_csv, std::ios::binary);
      if (!out) throw IoError("cannot open '" + out_csv + "'");
      out << "episodes,mean,stddev,min,max\n"
          << stats.episodes << ',' << format_double(stats.mean) << ','
          << format_double(stats.stddev) << ','
          << format_double(stats.min_return) << ','
          << format_double(stats.max_return) << "\n";
    }
    return kExitOk;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "eval: %s\n", e.what());
    return map_exception(e);
  }
}

namespace {

void dump_function_curves(const std::string& dir) {
  {
    std::ofstream out(dir + "/resine.csv", std::ios::binary);
    out << "x,F_s_-2,F_s_0,F_s_2\n";
    for (int i = -600; i <= 600; ++i) {
      const double x = i / 100.0;
      out << format_double(x);
      for (double s : {-2.0, 0.0, 2.0}) {
        out << ',' << format_double(math::resine_point(x, s).value);
      }
      out << "\n";
    }
  }
  {
    std::ofstream out(dir + "/rehse_rehae.csv", std::ios::binary);
    out << "x,rehse,rehae\n";
    for (int i = -600; i <= 600; ++i) {
      const double x = i / 100.0;
      out << format_double(x) << ',' << format_double(math::rehse_term(x))
          << ',' << format_double(math::rehae_term(x)) << "\n";
    }
  }
  {
    std::ofstream out(dir + "/omega.csv", std::ios::binary);
    out << "x,omega_barrier,omega_helper\n";
    for (int i = 1; i < 1000; ++i) {
      const double x = i / 1000.0;
      out << format_double(x) << ',' << format_double(math::omega_barrier(x))
          << ',' << format_double(math::omega_helper(x)) << "\n";
    }
  }
  {
    std::ofstream out(dir + "/swaddling.csv", std::ios::binary);
    out << "sigma,beta_0.05,beta_0.21\n";
    for (int i = 1; i < 1000; ++i) {
      const double sg = i / 1000.0;
      out << format_double(sg);
      for (double bt : {0.05, 0.21}) {
        const double v = math::omega_barrier(std::pow(sg, 1.0 / bt)) +
                         bt * math::omega_helper(sg) +
                         math::omega_barrier(bt * bt);
        out << ',' << format_double(v);
      }
      out << "\n";
    }
  }
}

void dump_schedule(const std::string& path, const WeightSchedule& schedule) {
  std::ofstream out(path, std::ios::binary);
  out << "i_n,weight\n";
  const int L = schedule.size();
  for (int i = 0; i < L; ++i) {
    out << format_double(static_cast<double>(i + 1) / L) << ','
        << format_double(schedule.weights()[i]) << "\n";
  }
}

double grid_argmin_swaddling(double beta, int grid) {
  double best_x = 0.0, best_v = std::numeric_limits<double>::infinity();
  for (int i = 1; i < grid; ++i) {
    const double sg = static_cast<double>(i) / grid;
    const double y = std::pow(sg, 1.0 / beta);
    if (y >= 1.0) break;
    const double v = math::omega_barrier(y) + beta * math::omega_helper(sg);
    if (v < best_v) {
      best_v = v;
      best_x = sg;
    }
  }
  return best_x;
}

}  // namespace

int cmd_verify(const std::string& out_dir) {
  try {
    fs::create_directories(out_dir);
    fs::create_directories(out_dir + "/functions");
    fs::create_directories(out_dir + "/schedules");
    CheckList checks(out_dir + "/report.txt");

    // Finite-difference oracle over every differentiable primitive.
    Rng rng(0x5eedULL);
    for (const auto& named : math::standard_diff_fns()) {
      double worst = 0.0;
      for (int k = 0; k < 20; ++k) {
        const Eigen::VectorXd x = named.sample_point(rng);
        const auto report = math::finite_diff_check(named.fn, x);
        worst = std::max(worst, report.max_rel_error);
      }
      checks.record("finite_diff." + named.name, worst <= 1e-4,
                    "max_rel_error=" + format_double(worst));
    }

    // Inverse identity: omega_barrier(tanh(y/2)) == y on (0, 6].
    {
      double worst = 0.0;
      for (int i = 1; i <= 600; ++i) {
        const double y = i / 100.0;
        worst = std::max(
            worst, std::abs(math::omega_barrier(std::tanh(0.5 * y)) - y));
      }
      checks.record("omega_tanh_identity", worst <= 1e-10,
                    "max_abs_error=" + format_double(worst));
    }

    // omega_helper argmin on a 10^6 grid sits at 1/e.
    {
      const int grid = 1000000;
      double best_x = 0.0, best_v = std::numeric_limits<double>::infinity();
      for (int i = 1; i < grid; ++i) {
        const double x = static_cast<double>(i) / grid;
        const double v = math::omega_helper(x);
        if (v < best_v) {
          best_v = v;
          best_x = x;
        }
      }
      const double err = std::abs(best_x - 1.0 / kE);
      checks.record("omega_helper_argmin", err <= 1e-6,
                    "argmin=" + format_double(best_x));
    }

    // Weight schedules at L = 384, all four kinds.
    const std::pair<const char*, ScheduleKind> kinds[] = {
        {"buffer", ScheduleKind::kBuffer},
        {"target_critic", ScheduleKind::kTargetCritic},
        {"buffer_dimpled", ScheduleKind::kBufferDimpled},
        {"target_critic_dimpled", ScheduleKind::kTargetCriticDimpled},
    };
    for (const auto& [name, kind] : kinds) {
      const WeightSchedule schedule(384, kind);
      dump_schedule(out_dir + "/schedules/" + name + "_384.csv", schedule);
      const double sum = schedule.weights().sum();
      const double min_w = schedule.weights().minCoeff();
      bool monotone = true;
      if (kind == ScheduleKind::kBuffer || kind == ScheduleKind::kTargetCritic) {
        for (int i = 1; i < schedule.size(); ++i) {
          const double delta =
              schedule.weights()[i] - schedule.weights()[i - 1];
          if (kind == ScheduleKind::kBuffer ? delta < 0.0 : delta > 0.0) {
            monotone = false;
          }
        }
      }
      checks.record(std::string("schedule.") + name,
                    std::abs(sum - 1.0) <= 1e-9 && min_w >= 0.0 && monotone,
                    "sum=" + format_double(sum));
    }

    // The beta approximation claim: for beta <= 0.05 the regularizer's
    // minimum matches the noise level 1/e.
    for (double beta : {0.03, 0.05}) {
      const double argmin = grid_argmin_swaddling(beta, 200000);
      const double err = std::abs(argmin - 1.0 / kE);
      checks.record("swaddling_beta_match_" + format_double(beta), err <= 0.02,
                    "argmin=" + format_double(argmin));
    }

    dump_function_curves(out_dir + "/functions");

    return checks.all_passed ? kExitOk : kExitInvariant;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "verify: %s\n", e.what());
    return map_exception(e);
  }
}

int cmd_inspect(const std::string& checkpoint) {
  try {
    std::vector<BlockInfo> blocks;
    const CheckpointHeader header = inspect_checkpoint(checkpoint, &blocks);
    std::printf("checkpoint %s\n", checkpoint.c_str());
    std::printf("  version    %u\n", header.version);
    std::printf("  variant    %s\n", to_string(header.variant).c_str());
    std::printf("  h_dim      %u\n", header.h_dim);
    std::printf("  n_out      %u\n", header.n_out);
    std::printf("  obs_dim    %u\n", header.obs_dim);
    std::printf("  action_dim %u\n", header.action_dim);
    std::printf("  blocks     %zu\n", blocks.size());
    for (const auto& b : blocks) {
      std::string shape;
      for (std::size_t i = 0; i < b.shape.size(); ++i) {
        shape += (i ? "x" : "") + std::to_string(b.shape[i]);
      }
      std::printf("  %-40s %-12s l2=%s\n", b.name.c_str(), shape.c_str(),
                  format_double(b.l2_norm).c_str());
    }
    return kExitOk;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "inspect: %s\n", e.what());
    return map_exception(e);
  }
}

int run_main(int argc, char** argv) {
  CLI::App app{"Symphony: deterministic actor-critic training harness"};
  app.require_subcommand(1);

  // --- train ---
  auto* train = app.add_subcommand("train", "Run exploration and training");
  std::string variant = "s3", env_name = "pendulum", out_dir, config_file,
              resume, c_ctrl_preset;
  std::int64_t steps = 0;
  std::uint64_t seed = 0;
  double lr = 0, grad_dropout = 0, noise_scale = 0, noise_clip = 0, c_ctrl = -1;
  int n_exp = 0, repeats = 0, h_dim = 0, n_out = 0, eval_every = -1,
      eval_episodes = -1, checkpoint_every = -1;
  bool dimpled = false, half_buffer = false, sqrt_divisor = false,
       continuous = false, eval_sigma_one = false;
  std::string resample;
  train->add_option("--variant", variant, "s3|se|s2|ed|s2t");
  train->add_option("--env", env_name, "pendulum|pointmass");
  train->add_option("--steps", steps, "total environment steps")->required();
  train->add_option("--seed", seed, "master seed");
  train->add_option("--out", out_dir, "output directory");
  train->add_option("--config", config_file, "key = value config file");
  train->add_option("--resume", resume, "checkpoint (.symc) to resume from");
  train->add_option("--lr", lr, "learning rate override");
  train->add_option("--n-exp", n_exp, "exploration steps override");
  train->add_option("--repeats", repeats, "prefill repeat count override");
  train->add_option("--h-dim", h_dim, "hidden width override");
  train->add_option("--n-out", n_out, "per-critic node count override");
  train->add_option("--grad-dropout", grad_dropout, "gradient dropout p");
  train->add_option("--noise-scale", noise_scale, "parametric noise scale");
  train->add_option("--noise-clip", noise_clip, "noise clip bound");
  train->add_option("--c-ctrl", c_ctrl, "environment control-cost weight");
  train->add_option("--c-ctrl-preset", c_ctrl_preset, "humanoid|walker");
  train->add_option("--eval-every", eval_every, "periodic eval cadence");
  train->add_option("--eval-episodes", eval_episodes, "episodes per eval");
  train->add_option("--checkpoint-every", checkpoint_every,
                    "checkpoint cadence in steps");
  train->add_option("--resample-per-update", resample,
                    "true|false: fresh batch per update");
  train->add_flag("--dimpled", dimpled, "use the dimpled weight schedules");
  train->add_flag("--half-buffer", half_buffer, "store the buffer as float16");
  train->add_flag("--sqrt-divisor", sqrt_divisor,
                  "optimizer divides by sqrt(v) instead of v");
  train->add_flag("--continuous", continuous,
                  "continuous learning: done-epsilon eviction, lr 1e-5");
  train->add_flag("--eval-sigma-one", eval_sigma_one,
                  "evaluate with sigma forced to 1");

  // --- eval ---
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  std::string eval_checkpoint, eval_env = "pendulum",
              eval_csv = "eval_stats.csv";
  int eval_n = 25;
  std::uint64_t eval_seed = 0;
  bool eval_sone = false;
  eval->add_option("checkpoint", eval_checkpoint, ".symc file")->required();
  eval->add_option("--env", eval_env, "environment name");
  eval->add_option("--episodes", eval_n, "evaluation episodes");
  eval->add_option("--seed", eval_seed, "evaluation seed");
  eval->add_option("--out", eval_csv, "statistics CSV path ('' to skip)");
  eval->add_flag("--sigma-one", eval_sone, "force sigma = 1");

  // --- verify ---
  auto* verify = app.add_subcommand("verify", "Run the function oracle suite");
  std::string verify_dir = "verify_report";
  verify->add_option("--out", verify_dir, "report directory");

  // --- inspect ---
  auto* inspect = app.add_subcommand("inspect", "Dump a checkpoint header");
  std::string inspect_checkpoint_path;
  inspect->add_option("checkpoint", inspect_checkpoint_path, ".symc file")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (train->parsed()) {
    RunConfig config;
    try {
      std::map<std::string, std::string> file_values;
      if (!config_file.empty()) file_values = parse_config_file(config_file);

      // Precedence: flags > file > variant preset. The variant itself is
      // picked from the flag, else the file, else s3.
      std::string chosen = variant;
      if (train->count("--variant") == 0) {
        if (auto it = file_values.find("run.variant"); it != file_values.end()) {
          chosen = it->second;
        }
      }
      config.algo = VariantConfig::preset(variant_from_string(chosen));
      file_values.erase("run.variant");
      apply_config_values(config, file_values);

      if (train->count("--env")) config.env_name = env_name;
      config.total_steps = steps;
      if (train->count("--seed")) config.seed = seed;
      if (train->count("--lr")) config.algo.lr = lr;
      if (train->count("--n-exp")) config.algo.n_exp = n_exp;
      if (train->count("--repeats")) config.algo.repeats = repeats;
      if (train->count("--h-dim")) config.algo.h_dim = h_dim;
      if (train->count("--n-out")) config.algo.n_out = n_out;
      if (train->count("--grad-dropout")) config.algo.grad_dropout_p = grad_dropout;
      if (train->count("--noise-scale")) config.algo.noise_scale = noise_scale;
      if (train->count("--noise-clip")) config.algo.noise_clip = noise_clip;
      if (train->count("--c-ctrl")) config.c_ctrl = c_ctrl;
      if (!c_ctrl_preset.empty()) config.c_ctrl = control_cost_preset(c_ctrl_preset);
      if (eval_every >= 0) config.eval_every = eval_every;
      if (eval_episodes >= 0) config.eval_episodes = eval_episodes;
      if (checkpoint_every >= 0) config.checkpoint_every = checkpoint_every;
      if (!resample.empty()) {
        config.algo.resample_per_update = resample == "true" || resample == "1";
      }
      if (dimpled) config.algo.dimpled_schedules = true;
      if (half_buffer) config.algo.buffer_precision = Precision::kHalf;
      if (sqrt_divisor) config.algo.sqrt_divisor = true;
      if (continuous) {
        config.algo.continuous_learning = true;
        config.algo.lr = 1e-5;
      }
      if (eval_sigma_one) config.algo.eval_sigma_one = true;
      config.resume_from = resume;
      config.out_dir = out_dir.empty()
                           ? "runs/" + to_string(config.algo.variant) + "_" +
                                 config.env_name + "_seed" + std::to_string(seed)
                           : out_dir;
      config.algo.validate();
    } catch (const std::exception& e) {
      std::fprintf(stderr, "train: %s\n", e.what());
      return kExitUsage;
    }
    return cmd_train(config);
  }
  if (eval->parsed()) {
    return cmd_eval(eval_checkpoint, eval_env, eval_n, eval_seed, eval_csv,
                    eval_sone);
  }
  if (verify->parsed()) {
    return cmd_verify(verify_dir);
  }
  if (inspect->parsed()) {
    return cmd_inspect(inspect_checkpoint_path);
  }
  return kExitUsage;
}

}  // namespace symphony::cli
