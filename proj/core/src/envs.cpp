#include "symphony/envs.hpp"

#include <cmath>
#include <stdexcept>

namespace symphony {

namespace {
constexpr double kPi = 3.14159265358979323846;

// Wrap to (-pi, pi]; pi maps to pi.
double wrap_angle(double x) {
  return x - 2.0 * kPi * std::ceil((x - kPi) / (2.0 * kPi));
}
}  // namespace

double control_cost_preset(const std::string& name) {
  if (name == "humanoid") return 0.1;
  if (name == "walker") return 0.001;
  throw std::invalid_argument("unknown control-cost preset: " + name);
}

// ---------------------------------------------------------------------------
// PendulumEnv
// ---------------------------------------------------------------------------

PendulumEnv::PendulumEnv() : PendulumEnv(Params{}) {}

PendulumEnv::PendulumEnv(const Params& params) : params_(params) {
  if (params_.dt <= 0.0) throw std::invalid_argument("pendulum: dt must be > 0");
}

Eigen::VectorXd PendulumEnv::observe() const {
  Eigen::VectorXd obs(3);
  obs << std::cos(theta_), std::sin(theta_), theta_dot_;
  return obs;
}

Eigen::VectorXd PendulumEnv::reset(std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0x70656e64ULL));  // 'pend'
  theta_ = wrap_angle(kPi + rng.uniform(-0.1, 0.1));
  theta_dot_ = rng.uniform(-0.05, 0.05);
  t_ = 0;
  return observe();
}

void PendulumEnv::set_state(double theta, double theta_dot) {
  theta_ = wrap_angle(theta);
  theta_dot_ = theta_dot;
  t_ = 0;
}

double PendulumEnv::energy() const {
  const auto& p = params_;
  const double kinetic =
      0.5 * p.mass * p.length * p.length * theta_dot_ * theta_dot_;
  // Potential with zero at hanging rest (theta = pi).
  const double potential = p.mass * p.gravity * p.length * (1.0 + std::cos(theta_));
  return kinetic + potential;
}

StepResult PendulumEnv::step(const Eigen::VectorXd& action) {
  if (action.size() != 1) {
    throw std::invalid_argument("pendulum: action must be 1-dimensional");
  }
  const auto& p = params_;
  const double a = std::clamp(action[0], -1.0, 1.0);
  const double torque = p.max_torque * a;
  const double inertia = p.mass * p.length * p.length;

  // Semi-implicit Euler; theta = 0 is the upright unstable equilibrium.
  const double accel = (p.gravity / p.length) * std::sin(theta_) + torque / inertia;
  theta_dot_ = std::clamp(theta_dot_ + accel * p.dt, -p.max_speed, p.max_speed);
  theta_ = wrap_angle(theta_ + theta_dot_ * p.dt);
  ++t_;

  StepResult result;
  result.observation = observe();
  result.reward =
      -(theta_ * theta_ + 0.1 * theta_dot_ * theta_dot_ + p.c_ctrl * a * a);
  result.terminated = false;
  result.truncated = t_ >= p.step_limit;
  return result;
}

std::unique_ptr<Environment> PendulumEnv::clone() const {
  return std::make_unique<PendulumEnv>(params_);
}

// ---------------------------------------------------------------------------
// PointMassEnv
// ---------------------------------------------------------------------------

PointMassEnv::PointMassEnv() : PointMassEnv(Params{}) {}

PointMassEnv::PointMassEnv(const Params& params) : params_(params) {
  if (params_.dt <= 0.0) throw std::invalid_argument("pointmass: dt must be > 0");
}

Eigen::VectorXd PointMassEnv::observe() const {
  Eigen::VectorXd obs(4);
  obs << pos_.x(), pos_.y(), vel_.x(), vel_.y();
  return obs;
}

Eigen::VectorXd PointMassEnv::reset(std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0x706d6173ULL));  // 'pmas'
  pos_.x() = rng.uniform(-params_.start_half, params_.start_half);
  pos_.y() = rng.uniform(-params_.start_half, params_.start_half);
  vel_.setZero();
  t_ = 0;
  return observe();
}

void PointMassEnv::set_state(const Eigen::Vector2d& pos,
                             const Eigen::Vector2d& vel) {
  pos_ = pos;
  vel_ = vel;
  t_ = 0;
}

StepResult PointMassEnv::step(const Eigen::VectorXd& action) {
  if (action.size() != 2) {
    throw std::invalid_argument("pointmass: action must be 2-dimensional");
  }
  const auto& p = params_;
  const Eigen::Vector2d a(std::clamp(action[0], -1.0, 1.0),
                          std::clamp(action[1], -1.0, 1.0));
  vel_ += p.accel_gain * a * p.dt;
  vel_.x() = std::clamp(vel_.x(), -p.max_speed, p.max_speed);
  vel_.y() = std::clamp(vel_.y(), -p.max_speed, p.max_speed);
  pos_ += vel_ * p.dt;
  ++t_;

  StepResult result;
  result.observation = observe();
  result.reward = -pos_.norm() - p.c_ctrl * a.squaredNorm();
  result.terminated =
      std::abs(pos_.x()) > p.arena_half || std::abs(pos_.y()) > p.arena_half;
  result.truncated = !result.terminated && t_ >= p.step_limit;
  return result;
}

std::unique_ptr<Environment> PointMassEnv::clone() const {
  return std::make_unique<PointMassEnv>(params_);
}

std::unique_ptr<Environment> make_env(const std::string& name, double c_ctrl) {
  if (name == "pendulum") {
    PendulumEnv::Params params;
    if (c_ctrl >= 0.0) params.c_ctrl = c_ctrl;
    return std::make_unique<PendulumEnv>(params);
  }
  if (name == "pointmass") {
    PointMassEnv::Params params;
    if (c_ctrl >= 0.0) params.c_ctrl = c_ctrl;
    return std::make_unique<PointMassEnv>(params);
  }
  throw std::invalid_argument("unknown environment: " + name);
}

}  // namespace symphony
