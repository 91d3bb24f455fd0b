#include "symphony/envs.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace {

using symphony::PendulumEnv;
using symphony::PointMassEnv;

constexpr double kPi = 3.14159265358979323846;

Eigen::VectorXd action1(double v) {
  Eigen::VectorXd a(1);
  a << v;
  return a;
}

Eigen::VectorXd action2(double x, double y) {
  Eigen::VectorXd a(2);
  a << x, y;
  return a;
}

TEST(Pendulum, UprightRestZeroReward) {
  PendulumEnv::Params params;
  params.c_ctrl = 0.0;
  PendulumEnv env(params);
  env.set_state(0.0, 0.0);
  const auto result = env.step(action1(0.0));
  EXPECT_EQ(result.reward, 0.0);
  EXPECT_FALSE(result.terminated);
}

TEST(Pendulum, HangingRestReward) {
  PendulumEnv::Params params;
  params.c_ctrl = 0.0;
  PendulumEnv env(params);
  env.set_state(kPi, 0.0);
  const auto result = env.step(action1(0.0));
  EXPECT_NEAR(result.reward, -kPi * kPi, 1e-9);
}

TEST(Pendulum, EnergyConservedWithoutTorque) {
  PendulumEnv::Params params;
  params.dt = 1e-4;
  params.c_ctrl = 0.0;
  params.step_limit = 20000;
  PendulumEnv env(params);
  env.set_state(kPi - 0.5, 0.0);
  const double e0 = env.energy();
  ASSERT_GT(e0, 0.0);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    env.step(action1(0.0));
    worst = std::max(worst, std::abs(env.energy() - e0) / e0);
  }
  EXPECT_LE(worst, 1e-3);
}

TEST(Pendulum, AngleStaysWrapped) {
  PendulumEnv env;
  env.set_state(3.0, 7.9);  // fast spin across the wrap
  for (int i = 0; i < 300; ++i) {
    env.step(action1(1.0));
    EXPECT_GT(env.theta(), -kPi - 1e-12);
    EXPECT_LE(env.theta(), kPi + 1e-12);
  }
}

TEST(Pendulum, ResetDeterministicPerSeed) {
  PendulumEnv env;
  const auto a = env.reset(42);
  const auto b = env.reset(42);
  EXPECT_EQ(a, b);
  const auto c = env.reset(43);
  EXPECT_NE(a, c);
  // Starts near hanging.
  EXPECT_NEAR(std::abs(env.theta()), kPi, 0.11);
}

TEST(Pendulum, TruncatesAtStepLimitNeverTerminates) {
  PendulumEnv env;
  env.reset(1);
  for (int i = 0; i < 199; ++i) {
    const auto result = env.step(action1(0.3));
    EXPECT_FALSE(result.terminated);
    EXPECT_FALSE(result.truncated);
  }
  const auto last = env.step(action1(0.3));
  EXPECT_FALSE(last.terminated);
  EXPECT_TRUE(last.truncated);
}

TEST(Pendulum, FiniteForAllActionSequences) {
  PendulumEnv env;
  env.reset(9);
  symphony::Rng rng(9);
  for (int i = 0; i < 500; ++i) {
    const auto result = env.step(action1(rng.uniform(-1.0, 1.0)));
    ASSERT_TRUE(result.observation.allFinite());
    ASSERT_TRUE(std::isfinite(result.reward));
  }
}

TEST(PointMass, AtGoalZeroReward) {
  PointMassEnv::Params params;
  params.c_ctrl = 0.0;
  PointMassEnv env(params);
  env.set_state({0.0, 0.0}, {0.0, 0.0});
  const auto result = env.step(action2(0.0, 0.0));
  EXPECT_EQ(result.reward, 0.0);
}

TEST(PointMass, ExitingArenaTerminates) {
  PointMassEnv env;
  env.set_state({0.99, 0.0}, {2.0, 0.0});
  const auto result = env.step(action2(1.0, 0.0));
  EXPECT_TRUE(result.terminated);
  EXPECT_FALSE(result.truncated);
}

TEST(PointMass, TerminatedAndTruncatedAreExclusive) {
  PointMassEnv env;
  symphony::Rng rng(4);
  for (int episode = 0; episode < 20; ++episode) {
    env.reset(episode);
    for (int i = 0; i < 400; ++i) {
      const auto result = env.step(
          action2(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)));
      ASSERT_FALSE(result.terminated && result.truncated);
      if (result.terminated || result.truncated) break;
    }
  }
}

// Scripted PD controller: the oracle used to calibrate the learning smoke
// test. From any start in the inner half-arena it must reach the goal region
// within 200 steps.
TEST(PointMass, ScriptedControllerReachesGoal) {
  for (int gx = -2; gx <= 2; ++gx) {
    for (int gy = -2; gy <= 2; ++gy) {
      PointMassEnv env;
      env.set_state({0.25 * gx, 0.25 * gy}, {0.0, 0.0});
      bool reached = false;
      Eigen::VectorXd obs(4);
      obs << 0.25 * gx, 0.25 * gy, 0.0, 0.0;
      for (int i = 0; i < 200; ++i) {
        const double ax = std::clamp(-1.0 * obs[0] - 2.0 * obs[2], -1.0, 1.0);
        const double ay = std::clamp(-1.0 * obs[1] - 2.0 * obs[3], -1.0, 1.0);
        const auto result = env.step(action2(ax, ay));
        obs = result.observation;
        if (obs.head<2>().norm() < 0.1) {
          reached = true;
          break;
        }
        ASSERT_FALSE(result.terminated);
      }
      EXPECT_TRUE(reached) << "start (" << 0.25 * gx << ", " << 0.25 * gy << ")";
    }
  }
}

TEST(Factory, NamesAndPresets) {
  EXPECT_EQ(symphony::make_env("pendulum")->obs_dim(), 3);
  EXPECT_EQ(symphony::make_env("pointmass")->obs_dim(), 4);
  EXPECT_EQ(symphony::make_env("pendulum")->a_max(), 1.0);
  EXPECT_EQ(symphony::make_env("pointmass")->a_max(), 1.0);
  EXPECT_THROW(symphony::make_env("humanoid"), std::invalid_argument);
  EXPECT_EQ(symphony::control_cost_preset("humanoid"), 0.1);
  EXPECT_EQ(symphony::control_cost_preset("walker"), 0.001);
  EXPECT_THROW(symphony::control_cost_preset("cheetah"), std::invalid_argument);
}

TEST(Factory, ControlCostOverride) {
  auto env = symphony::make_env("pendulum", 0.1);
  auto* pendulum = dynamic_cast<PendulumEnv*>(env.get());
  ASSERT_NE(pendulum, nullptr);
  EXPECT_EQ(pendulum->params().c_ctrl, 0.1);
}

TEST(Clone, IndependentPhysicsCopies) {
  PendulumEnv env;
  env.reset(5);
  auto copy = env.clone();
  const auto a = copy->reset(5);
  const auto b = env.reset(5);
  EXPECT_EQ(a, b);
  env.step(action1(1.0));  // advancing one must not move the other
  const auto c = copy->reset(5);
  EXPECT_EQ(a, c);
}

}  // namespace
