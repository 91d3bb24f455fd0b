#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <string>

#include "symphony/rng.hpp"

namespace symphony {

struct StepResult {
  Eigen::VectorXd observation;
  double reward = 0.0;
  bool terminated = false;  // true physical failure
  bool truncated = false;   // artificial step limit hit
};

/// Desk-scale continuous-control environment. reset(seed) is deterministic;
/// step() returns finite observations and rewards for all in-range actions.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual Eigen::VectorXd reset(std::uint64_t seed) = 0;
  virtual StepResult step(const Eigen::VectorXd& action) = 0;

  /// Fresh instance with identical physics, for evaluation rollouts.
  virtual std::unique_ptr<Environment> clone() const = 0;

  virtual int obs_dim() const = 0;
  virtual int action_dim() const = 0;
  virtual double a_max() const = 0;
  virtual int step_limit() const = 0;
  virtual const std::string& name() const = 0;
};

/// Control-cost presets observed in the reference environments.
double control_cost_preset(const std::string& name);  // "humanoid" | "walker"

/// Pendulum swing-up. Angle 0 is upright, wrapped to (-pi, pi]; episodes
/// start near hanging. Reward (on the post-step state):
///   -(theta^2 + 0.1 theta_dot^2 + c_ctrl * a^2).
/// Never terminates physically; truncation only.
class PendulumEnv : public Environment {
 public:
  struct Params {
    double mass = 1.0;
    double length = 1.0;
    double gravity = 10.0;
    double dt = 0.05;
    double max_torque = 8.0;  // physical torque at |action| = a_max
    double max_speed = 8.0;
    double c_ctrl = 0.001;
    int step_limit = 200;
  };

  PendulumEnv();  // default physics
  explicit PendulumEnv(const Params& params);

  Eigen::VectorXd reset(std::uint64_t seed) override;
  StepResult step(const Eigen::VectorXd& action) override;
  std::unique_ptr<Environment> clone() const override;

  int obs_dim() const override { return 3; }  // cos, sin, theta_dot
  int action_dim() const override { return 1; }
  double a_max() const override { return 1.0; }
  int step_limit() const override { return params_.step_limit; }
  const std::string& name() const override { return name_; }

  // Test access.
  double theta() const { return theta_; }
  double theta_dot() const { return theta_dot_; }
  void set_state(double theta, double theta_dot);
  const Params& params() const { return params_; }
  /// Mechanical energy, zero datum at the hanging rest state.
  double energy() const;

 private:
  Eigen::VectorXd observe() const;

  Params params_;
  std::string name_ = "pendulum";
  double theta_ = 3.14159265358979323846;
  double theta_dot_ = 0.0;
  int t_ = 0;
};

/// Planar double integrator in a bounded arena with the goal at the origin.
/// Leaving the arena terminates the episode (a genuine "fall"); reward is
///   -|p - goal| - c_ctrl * sum(a^2).
class PointMassEnv : public Environment {
 public:
  struct Params {
    double dt = 0.05;
    double accel_gain = 1.0;
    double max_speed = 2.0;
    double arena_half = 1.0;
    double start_half = 0.5;  // reset box
    double c_ctrl = 0.001;
    int step_limit = 300;
  };

  PointMassEnv();  // default physics
  explicit PointMassEnv(const Params& params);

  Eigen::VectorXd reset(std::uint64_t seed) override;
  StepResult step(const Eigen::VectorXd& action) override;
  std::unique_ptr<Environment> clone() const override;

  int obs_dim() const override { return 4; }  // x, y, vx, vy
  int action_dim() const override { return 2; }
  double a_max() const override { return 1.0; }
  int step_limit() const override { return params_.step_limit; }
  const std::string& name() const override { return name_; }

  const Params& params() const { return params_; }
  void set_state(const Eigen::Vector2d& pos, const Eigen::Vector2d& vel);

 private:
  Eigen::VectorXd observe() const;

  Params params_;
  std::string name_ = "pointmass";
  Eigen::Vector2d pos_{0.0, 0.0};
  Eigen::Vector2d vel_{0.0, 0.0};
  int t_ = 0;
};

/// Factory used by the CLI; c_ctrl < 0 keeps the environment default.
std::unique_ptr<Environment> make_env(const std::string& name,
                                      double c_ctrl = -1.0);

}  // namespace symphony
