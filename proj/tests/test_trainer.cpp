#include "symphony/trainer.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "symphony/io.hpp"
#include "symphony/math_core.hpp"

namespace {

using symphony::LossParts;
using symphony::Mat;
using symphony::Param;
using symphony::RunConfig;
using symphony::Trainer;
using symphony::TransitionBatch;
using symphony::Variant;
using symphony::VariantConfig;

RunConfig tiny_config(int n_out = 4, int h_dim = 8) {
  RunConfig config;
  config.algo = VariantConfig::preset(Variant::kS3);
  config.algo.n_exp = 64;
  config.algo.repeats = 4;
  config.algo.h_dim = h_dim;
  config.algo.n_out = n_out;
  config.env_name = "pendulum";
  config.seed = 17;
  config.total_steps = 0;  // explore() runs the full n_exp
  return config;
}

TEST(RewardNorm, SpecExamples) {
  EXPECT_EQ(Trainer::reward_norm({1.0, -1.0, 2.0, -2.0}), 1.5);
  EXPECT_EQ(Trainer::reward_norm({0.0, 0.0, 0.0}), 1.0);  // fallback
}

TEST(Explore, FreezesRewardNormAndPrefills) {
  Trainer trainer(tiny_config());
  trainer.explore();
  ASSERT_TRUE(trainer.exploration_complete());
  EXPECT_GT(trainer.scalars().r_norm, 0.0);
  ASSERT_NE(trainer.buffer(), nullptr);
  EXPECT_EQ(trainer.buffer()->capacity(), 64 * 4);
  // Pendulum near hanging: every normalized exploration reward is negative
  // and the mean of |r| equals r_norm, so means of r/r_norm sit near -1.
  double mean = 0.0;
  for (int i = 0; i < trainer.buffer()->capacity(); ++i) {
    mean += trainer.buffer()->at(i).reward_norm;
  }
  mean /= trainer.buffer()->capacity();
  EXPECT_NEAR(mean, -1.0, 1e-9);
}

TEST(Explore, StepsBudgetShorterThanNExp) {
  RunConfig config = tiny_config();
  config.total_steps = 20;  // less than n_exp = 64
  Trainer trainer(config);
  trainer.explore();
  EXPECT_FALSE(trainer.exploration_complete());
  EXPECT_EQ(trainer.buffer(), nullptr);
  EXPECT_EQ(trainer.scalars().global_step, 20);
  EXPECT_THROW(trainer.train_step(), std::logic_error);
}

// Forces a constant target Q: every critic/target parameter zeroed except
// the output biases, so all nodes equal `value` regardless of input. With a
// negligible learning rate the constant survives optimizer steps.
void pin_constant_q(Trainer& trainer, double value) {
  for (auto* p : trainer.net().all_params()) {
    if (p->name.find("fc_out.bias") != std::string::npos) {
      p->value.setConstant(value);
    } else if (p->name.rfind("critic", 0) == 0 ||
               p->name.rfind("target_critic", 0) == 0) {
      p->value.setZero();
    }
  }
}

TEST(UpdateOnce, QEmaInitializesFromFirstBatchThenConvergesGeometrically) {
  RunConfig config = tiny_config();
  config.algo.lr = 1e-30;  // keep the pinned network effectively frozen
  Trainer trainer(config);
  trainer.explore();
  pin_constant_q(trainer, 3.0);

  auto batch = trainer.buffer()->sample(config.algo.batch(), trainer.noise_rng());
  const LossParts first = trainer.update_once(batch);
  ASSERT_TRUE(first.applied);
  EXPECT_NEAR(first.q_target_detached_mean, 3.0, 1e-12);
  // Seeded from the first batch: EMA equals the batch mean after one update.
  EXPECT_NEAR(trainer.scalars().q_ema, 3.0, 1e-12);

  // Displace the EMA and watch the gap contract by exactly alpha per update.
  trainer.scalars().q_ema = 10.0;
  double gap = 10.0 - 3.0;
  for (int k = 0; k < 20; ++k) {
    trainer.update_once(batch);
    const double new_gap = trainer.scalars().q_ema - 3.0;
    EXPECT_NEAR(new_gap / gap, symphony::math::kGoldenAlpha, 1e-12);
    gap = new_gap;
  }
}

TEST(UpdateOnce, AdvantageTermZeroWhenTargetEqualsEma) {
  RunConfig config = tiny_config();
  config.algo.lr = 1e-30;
  Trainer trainer(config);
  trainer.explore();
  pin_constant_q(trainer, 2.0);
  trainer.scalars().q_ema = 2.0;
  trainer.scalars().q_ema_initialized = 1.0;

  auto batch = trainer.buffer()->sample(config.algo.batch(), trainer.noise_rng());
  const LossParts parts = trainer.update_once(batch);
  EXPECT_EQ(parts.advantage_term, 0.0);
}

TEST(UpdateOnce, ExactlyOneBackwardPass) {
  Trainer trainer(tiny_config());
  trainer.explore();
  auto batch = trainer.buffer()->sample(trainer.config().algo.batch(),
                                        trainer.noise_rng());
  const auto before = trainer.backward_count();
  trainer.update_once(batch);
  EXPECT_EQ(trainer.backward_count(), before + 1);
}

TEST(TrainStep, RunsGUpdatesPerEnvironmentStep) {
  Trainer trainer(tiny_config());
  trainer.explore();
  const auto before = trainer.backward_count();
  trainer.train_step();
  EXPECT_EQ(trainer.backward_count(), before + 3);  // G = 3
  trainer.train_step();
  EXPECT_EQ(trainer.backward_count(), before + 6);
}

// Gradient routing: the advantage term trains the actor only, the TD term
// the online critic only, Swaddling the actor only; and the combined single
// backward equals the per-term sum.
TEST(LossBackward, GradientRoutingAndLinearity) {
  Trainer trainer(tiny_config());
  trainer.explore();
  auto batch = trainer.buffer()->sample(trainer.config().algo.batch(),
                                        trainer.noise_rng());

  // Warm-up settles the EMA initialization so all runs share state.
  trainer.reseed_streams(1000);
  trainer.net().zero_grad();
  trainer.loss_backward(batch, 1, 1, 1);

  auto snapshot = [&](double w_adv, double w_td, double w_sw) {
    trainer.reseed_streams(1000);
    trainer.net().zero_grad();
    trainer.loss_backward(batch, w_adv, w_td, w_sw);
    std::vector<Mat> grads;
    for (auto* p : trainer.net().trainable_params()) grads.push_back(p->grad);
    return grads;
  };

  const auto combined = snapshot(1, 1, 1);
  const auto adv_only = snapshot(1, 0, 0);
  const auto td_only = snapshot(0, 1, 0);
  const auto sw_only = snapshot(0, 0, 1);

  auto params = trainer.net().trainable_params();
  double adv_on_actor = 0, td_on_critic = 0, sw_on_actor = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const bool is_actor = params[i]->name.rfind("actor", 0) == 0;
    const double adv_norm = adv_only[i].cwiseAbs().maxCoeff();
    const double td_norm = td_only[i].cwiseAbs().maxCoeff();
    const double sw_norm = sw_only[i].cwiseAbs().maxCoeff();
    if (is_actor) {
      adv_on_actor += adv_norm;
      sw_on_actor += sw_norm;
      EXPECT_EQ(td_norm, 0.0) << "TD gradient leaked into " << params[i]->name;
    } else {
      td_on_critic += td_norm;
      EXPECT_EQ(adv_norm, 0.0)
          << "advantage gradient leaked into " << params[i]->name;
      EXPECT_EQ(sw_norm, 0.0)
          << "swaddling gradient leaked into " << params[i]->name;
    }
    for (int k = 0; k < combined[i].size(); ++k) {
      const double sum =
          adv_only[i].data()[k] + td_only[i].data()[k] + sw_only[i].data()[k];
      EXPECT_NEAR(combined[i].data()[k], sum, 1e-10) << params[i]->name;
    }
  }
  EXPECT_GT(adv_on_actor, 0.0);
  EXPECT_GT(td_on_critic, 0.0);
  EXPECT_GT(sw_on_actor, 0.0);
}

TEST(LossBackward, TargetParametersNeverReceiveGradients) {
  Trainer trainer(tiny_config());
  trainer.explore();
  auto batch = trainer.buffer()->sample(trainer.config().algo.batch(),
                                        trainer.noise_rng());
  trainer.net().zero_grad();
  trainer.loss_backward(batch, 1, 1, 1);
  for (auto* p : trainer.net().target_params()) {
    EXPECT_EQ(p->grad.cwiseAbs().maxCoeff(), 0.0) << p->name;
  }
}

TEST(TrainStep, DeliberateFallWindowAndZeroedActions) {
  Trainer trainer(tiny_config());
  EXPECT_EQ(trainer.deliberate_fall_from(), 190);  // 200 - 200/20

  RunConfig pm = tiny_config();
  pm.env_name = "pointmass";
  Trainer pm_trainer(pm);
  EXPECT_EQ(pm_trainer.deliberate_fall_from(), 285);  // 300 - 300/20

  // Zero-zone actions carry no policy component: push the a-head bias to
  // saturation, then compare.
  trainer.explore();
  for (auto* p : trainer.net().actor().params()) {
    if (p->name == "actor.head_a.bias") p->value.setConstant(50.0);
  }
  const Eigen::VectorXd obs = Eigen::VectorXd::Zero(3);
  trainer.reseed_streams(123);
  const auto policy_action = trainer.act_for_training(obs, false);
  trainer.reseed_streams(123);
  const auto zeroed_action = trainer.act_for_training(obs, true);
  // Saturated policy drives |a| near tanh's ceiling; the zeroed action stays
  // within tanh(noise) <= tanh(1).
  EXPECT_GT(std::abs(policy_action[0]), std::abs(zeroed_action[0]));
  EXPECT_LE(std::abs(zeroed_action[0]), std::tanh(1.0) + 1e-12);
}

TEST(Noise, ClippedToUnitRangeByConstruction) {
  // noise = (1/e) z with z clipped to [-e, e] lands exactly in [-1, 1].
  Trainer trainer(tiny_config());
  trainer.reseed_streams(5);
  auto& rng = trainer.noise_rng();
  const auto& algo = trainer.config().algo;
  for (int i = 0; i < 20000; ++i) {
    const double n = algo.noise_scale * rng.normal_clipped(algo.noise_clip);
    EXPECT_LE(std::abs(n), 1.0);
  }
}

TEST(Determinism, IdenticalSeedsGiveIdenticalEpisodeLogs) {
  RunConfig config = tiny_config();
  config.total_steps = 64 + 450;  // exploration plus a bit over two episodes

  auto run = [&]() {
    Trainer trainer(config);
    trainer.explore();
    while (trainer.scalars().global_step < config.total_steps) {
      trainer.train_step();
    }
    return trainer.episode_log();
  };
  const auto log_a = run();
  const auto log_b = run();
  ASSERT_EQ(log_a.size(), log_b.size());
  ASSERT_GT(log_a.size(), 0u);
  for (std::size_t i = 0; i < log_a.size(); ++i) {
    EXPECT_EQ(log_a[i].ret, log_b[i].ret);
    EXPECT_EQ(log_a[i].avg_sigma, log_b[i].avg_sigma);
    EXPECT_EQ(log_a[i].q_ema, log_b[i].q_ema);
    EXPECT_EQ(log_a[i].critic_loss, log_b[i].critic_loss);
  }
}

TEST(Evaluate, DeterministicAndNoiseFree) {
  Trainer trainer(tiny_config());
  trainer.explore();
  const auto a = trainer.evaluate(3);
  const auto b = trainer.evaluate(3);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.stddev, b.stddev);
  EXPECT_EQ(a.min_return, b.min_return);
  EXPECT_LE(a.min_return, a.mean);
  EXPECT_LE(a.mean, a.max_return);
}

TEST(Evaluate, ZeroPolicyMatchesHangingReturn) {
  Trainer trainer(tiny_config());
  trainer.explore();
  for (auto* p : trainer.net().actor().params()) p->value.setZero();
  // Zero actor: a_raw = 0, sigma clipped to 1e-3, action ~ 0; the pendulum
  // hangs. Analytic hanging-at-rest return: -step_limit * pi^2.
  const auto stats = trainer.evaluate(10);
  const double analytic = -200.0 * 3.14159265358979323846 * 3.14159265358979323846;
  EXPECT_NEAR(stats.mean / analytic, 1.0, 0.05);
}

TEST(Checkpoint, SaveLoadSaveBytesIdentical) {
  namespace fs = std::filesystem;
  const std::string dir = ::testing::TempDir() + "sym_ckpt_test";
  fs::create_directories(dir);

  RunConfig config = tiny_config();
  config.total_steps = 64 + 40;
  Trainer trainer(config);
  trainer.explore();
  while (trainer.scalars().global_step < config.total_steps) {
    trainer.train_step();
  }
  trainer.save_checkpoint_files(dir + "/a");

  Trainer loaded(config);
  loaded.resume_from(dir + "/a.symc");
  loaded.save_checkpoint_files(dir + "/b");

  EXPECT_EQ(symphony::read_file(dir + "/a.symc"),
            symphony::read_file(dir + "/b.symc"));
  EXPECT_EQ(symphony::read_file(dir + "/a.frb"),
            symphony::read_file(dir + "/b.frb"));
}

TEST(Checkpoint, ResumedTrainingContinues) {
  namespace fs = std::filesystem;
  const std::string dir = ::testing::TempDir() + "sym_resume_test";
  fs::create_directories(dir);

  RunConfig config = tiny_config();
  config.total_steps = 64 + 30;
  Trainer first(config);
  first.explore();
  while (first.scalars().global_step < config.total_steps) first.train_step();
  first.save_checkpoint_files(dir + "/ck");

  Trainer second(config);
  second.resume_from(dir + "/ck.symc");
  EXPECT_EQ(second.scalars().global_step, config.total_steps);
  EXPECT_TRUE(second.exploration_complete());
  second.train_step();  // must run without re-exploring
  EXPECT_EQ(second.scalars().global_step, config.total_steps + 1);
}

TEST(MetricsWriter, HeaderAndRowFormat) {
  const std::string path = ::testing::TempDir() + "metrics_fmt.csv";
  {
    symphony::MetricsWriter writer(path);
    symphony::EpisodeRecord row;
    row.step = 1234;
    row.episode = 2;
    row.ret = -100.5;
    row.avg_sigma = 0.25;
    row.q_ema = -1.5;
    writer.write_row(row);
  }
  const std::string text = symphony::read_file(path);
  EXPECT_NE(text.find("step,episode,return,avg_sigma,avg_beta,actor_loss,"
                      "critic_loss,swaddling,q_ema,nonfinite_skips\n"),
            std::string::npos);
  EXPECT_NE(text.find("1234,2,-100.5,0.25,0,0,0,0,-1.5,0\n"), std::string::npos);
}

}  // namespace
