#include "symphony/optim.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

namespace {

using symphony::AdamW;
using symphony::Param;

constexpr double kBeta1 = 0.6180339887498948482045868343656;

TEST(AdamW, SingleStepMatchesHandComputation) {
  Param p("p", 1, 1);
  p.value(0, 0) = 0.1;
  p.grad(0, 0) = 1.0;
  AdamW optim({&p}, AdamW::Options{});
  ASSERT_TRUE(optim.step());

  // From zero state with g = 1: m = 1 - beta1, v = 1 - beta2 = 0.005,
  // theta <- theta - lr (m/(v + eps) + lambda theta).
  const double m = 1.0 - kBeta1;
  const double v = 1.0 - 0.995;
  EXPECT_NEAR(m, 0.382, 5e-4);
  const double expected = 0.1 - 1e-4 * (m / (v + 1e-8) + 0.01 * 0.1);
  EXPECT_NEAR(p.value(0, 0), expected, 1e-15);
  EXPECT_NEAR(p.value(0, 0), 0.09236059505360779, 1e-12);
  EXPECT_NEAR(optim.moments_m()[0](0, 0), 0.3819660112501051, 1e-15);
  EXPECT_NEAR(optim.moments_v()[0](0, 0), 0.005, 1e-15);
}

TEST(AdamW, ZeroGradientPureDecay) {
  Param p("p", 2, 1);
  p.value.setConstant(3.0);
  p.grad.setZero();
  AdamW optim({&p}, AdamW::Options{});
  const int steps = 10;
  for (int k = 0; k < steps; ++k) ASSERT_TRUE(optim.step());
  // m = v = 0 throughout: theta_k = theta_0 (1 - lr*lambda)^k exactly.
  const double factor = std::pow(1.0 - 1e-4 * 0.01, steps);
  EXPECT_NEAR(p.value(0, 0), 3.0 * factor, 1e-12);
  EXPECT_EQ(optim.moments_v()[0](0, 0), 0.0);
}

TEST(AdamW, NoDecayReducesToBiasCorrectionFreeAdam) {
  Param p("p", 1, 1);
  p.value(0, 0) = 0.5;
  p.grad(0, 0) = 2.0;
  AdamW::Options opt;
  opt.weight_decay = 0.0;
  AdamW optim({&p}, opt);
  ASSERT_TRUE(optim.step());
  const double m = (1.0 - kBeta1) * 2.0;
  const double v = 0.005 * 4.0;
  EXPECT_NEAR(p.value(0, 0), 0.5 - 1e-4 * m / (v + 1e-8), 1e-15);
}

TEST(AdamW, VStaysNonNegativeAndConvergesGeometrically) {
  Param p("p", 1, 1);
  AdamW optim({&p}, AdamW::Options{});
  double prev_v = 0.0;
  for (int k = 1; k <= 200; ++k) {
    p.grad(0, 0) = 2.0;  // constant |g|
    ASSERT_TRUE(optim.step());
    const double v = optim.moments_v()[0](0, 0);
    ASSERT_GE(v, prev_v);
    // v_k = (1 - beta2^k) g^2.
    EXPECT_NEAR(v, (1.0 - std::pow(0.995, k)) * 4.0, 1e-9);
    prev_v = v;
  }
  EXPECT_NEAR(prev_v, 4.0, 4.0 * std::pow(0.995, 200) + 1e-9);
}

TEST(AdamW, NonFiniteGradientRejectsWholeStep) {
  Param a("a", 1, 1), b("b", 1, 1);
  a.value(0, 0) = 1.0;
  b.value(0, 0) = 2.0;
  AdamW optim({&a, &b}, AdamW::Options{});
  a.grad(0, 0) = 1.0;
  b.grad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_FALSE(optim.step());
  EXPECT_EQ(a.value(0, 0), 1.0);  // untouched, including the finite one
  EXPECT_EQ(optim.moments_m()[0](0, 0), 0.0);
  EXPECT_EQ(optim.rejected_steps(), 1);

  b.grad(0, 0) = std::numeric_limits<double>::infinity();
  EXPECT_FALSE(optim.step());
  EXPECT_EQ(optim.rejected_steps(), 2);

  b.grad(0, 0) = 0.0;
  EXPECT_TRUE(optim.step());
}

TEST(AdamW, DeterministicBitwise) {
  auto run = [](std::vector<double>& out) {
    Param p("p", 2, 2);
    p.value << 0.1, -0.2, 0.3, -0.4;
    AdamW optim({&p}, AdamW::Options{});
    for (int k = 0; k < 50; ++k) {
      p.grad << 0.5, -1.0, 2.0, -0.01;
      optim.step();
    }
    out.assign(p.value.data(), p.value.data() + 4);
  };
  std::vector<double> run_a, run_b;
  run(run_a);
  run(run_b);
  EXPECT_EQ(0, std::memcmp(run_a.data(), run_b.data(), 4 * sizeof(double)));
}

TEST(AdamW, SqrtDivisorFlagChangesTheUpdate) {
  Param literal("p", 1, 1), rooted("p", 1, 1);
  literal.value(0, 0) = rooted.value(0, 0) = 0.1;
  literal.grad(0, 0) = rooted.grad(0, 0) = 1.0;
  AdamW::Options opt;
  AdamW a({&literal}, opt);
  opt.sqrt_divisor = true;
  AdamW b({&rooted}, opt);
  ASSERT_TRUE(a.step());
  ASSERT_TRUE(b.step());
  EXPECT_NE(literal.value(0, 0), rooted.value(0, 0));
  const double m = 1.0 - kBeta1;
  EXPECT_NEAR(rooted.value(0, 0),
              0.1 - 1e-4 * (m / (std::sqrt(0.005) + 1e-8) + 0.01 * 0.1), 1e-15);
}

TEST(AdamW, PaperConstantsAreTheDefaults) {
  AdamW::Options opt;
  EXPECT_NEAR(opt.beta1, 0.618, 5e-4);   // alpha = 1/phi
  EXPECT_EQ(opt.beta2, 0.995);           // 1 - tau
  EXPECT_EQ(opt.weight_decay, 0.01);
  EXPECT_EQ(opt.lr, 1e-4);
  EXPECT_FALSE(opt.sqrt_divisor);
}

}  // namespace
