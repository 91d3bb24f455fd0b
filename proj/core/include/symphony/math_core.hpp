#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>
#include <vector>

#include "symphony/rng.hpp"

namespace symphony {

enum class ScheduleKind {
  kBuffer,               // tanh((pi*i_n)^e): low weight on old slots, recent plateau
  kTargetCritic,         // tanh((pi*(1-i_n))^e): high weight on sorted minima
  kBufferDimpled,        // order pi, Gaussian dimple at the newest end
  kTargetCriticDimpled,  // order pi, Gaussian dimple at the minimum end
};

/// Fixed tanh-shaped weight vector shared by target-critic node aggregation
/// and replay-buffer sampling. Negative dimple values are clamped to zero
/// before normalization; the stored vector sums to 1. Immutable.
class WeightSchedule {
 public:
  WeightSchedule(int length, ScheduleKind kind);

  /// Equal-probability schedule (testing hook for the replay buffer).
  static WeightSchedule uniform(int length);

  const Eigen::VectorXd& weights() const { return weights_; }
  ScheduleKind kind() const { return kind_; }
  int size() const { return static_cast<int>(weights_.size()); }

 private:
  WeightSchedule() = default;
  Eigen::VectorXd weights_;
  ScheduleKind kind_ = ScheduleKind::kBuffer;
};

namespace math {

/// 1/phi, the smoothing factor of the temporal-advantage EMA and AdamW beta1.
inline constexpr double kGoldenAlpha = 0.6180339887498948482045868343656;

/// Clipping window for sigma and beta, matching the actor's output squash.
inline constexpr double kClipLo = 1e-3;
inline constexpr double kClipHi = 1.0 - 1e-3;

// ---------------------------------------------------------------------------
// ReSine activation: sigma = sigmoid(s), f = sigma*sin(x/sigma),
// F = f * sigmoid(1.5/sigma * f). Partials are with respect to x and the
// pre-squash parameter s.
// ---------------------------------------------------------------------------

struct ResinePoint {
  double value;
  double d_x;
  double d_s;
};

ResinePoint resine_point(double x, double s);

struct ResineEval {
  Eigen::VectorXd value;
  Eigen::VectorXd d_x;  // diagonal Jacobian wrt x
  Eigen::VectorXd d_s;  // diagonal Jacobian wrt s
};

/// Elementwise ReSine; x and s must have equal length.
ResineEval resine(const Eigen::VectorXd& x, const Eigen::VectorXd& s);

// ---------------------------------------------------------------------------
// Rectified Huber errors. Both are means over the batch; gradients are of the
// mean with respect to each element.
// ---------------------------------------------------------------------------

inline double rehse_term(double x) { return x * std::tanh(0.5 * x); }

inline double rehse_dterm(double x) {
  const double t = std::tanh(0.5 * x);
  return t + 0.5 * x * (1.0 - t * t);
}

inline double rehae_term(double x) { return std::abs(x) * std::tanh(0.5 * x); }

inline double rehae_dterm(double x) {
  const double t = std::tanh(0.5 * x);
  const double sign = (x > 0.0) - (x < 0.0);
  return sign * t + 0.5 * std::abs(x) * (1.0 - t * t);
}

/// mean(x * tanh(x/2)); symmetric, non-negative.
double rehse(const Eigen::VectorXd& x, Eigen::VectorXd* grad = nullptr);

/// mean(|x| * tanh(x/2)); sign of each term matches sign of x.
double rehae(const Eigen::VectorXd& x, Eigen::VectorXd* grad = nullptr);

// ---------------------------------------------------------------------------
// Swaddling pieces. omega_barrier(x) = ln((1+x)/(1-x)) = 2 atanh(x) on (0,1);
// omega_helper(x) = x ln x with its minimum at 1/e.
// ---------------------------------------------------------------------------

double omega_barrier(double x);        // throws std::domain_error outside (0,1)
double omega_barrier_deriv(double x);  // 2 / (1 - x^2)
double omega_helper(double x);         // throws std::domain_error for x <= 0
double omega_helper_deriv(double x);   // ln x + 1

/// Full Swaddling regularizer, mean over batch and action dimension of
///   omega_barrier(sigma^(1/beta*)) + beta*omega_helper(sigma)
///   + omega_barrier(beta^2)
/// where beta* is detached: the exponent contributes no beta gradient.
/// Inputs must lie in [kClipLo, kClipHi]; throws std::domain_error otherwise.
double full_swaddling(const Eigen::ArrayXXd& sigma, const Eigen::ArrayXXd& beta,
                      Eigen::ArrayXXd* d_sigma = nullptr,
                      Eigen::ArrayXXd* d_beta = nullptr);

/// Reference baseline: beta * mean(a^2).
double control_cost_baseline(const Eigen::VectorXd& a, double beta);

// ---------------------------------------------------------------------------
// Finite-difference oracle.
// ---------------------------------------------------------------------------

struct DiffFn {
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> evaluate;
  /// Vector-Jacobian product: (x, upstream) -> J(x)^T upstream.
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>
      gradient;
};

struct FiniteDiffReport {
  Eigen::VectorXd analytic;
  Eigen::VectorXd numeric;
  Eigen::VectorXd rel_error;
  double max_rel_error = 0.0;
  int worst_coord = -1;
  bool passed(double tol) const { return max_rel_error <= tol; }
};

/// Central-difference check of f.gradient against f.evaluate. `upstream`
/// defaults to all-ones. A failing check is a report outcome, not an error.
FiniteDiffReport finite_diff_check(const DiffFn& f, const Eigen::VectorXd& x,
                                   double step = 1e-5,
                                   const Eigen::VectorXd* upstream = nullptr);

struct NamedDiffFn {
  std::string name;
  DiffFn fn;
  /// Draws a non-singular test point (away from clip edges and domain walls).
  std::function<Eigen::VectorXd(Rng&)> sample_point;
};

/// The library's differentiable primitives packaged for the oracle suite.
/// ReSine takes [x; s] stacked; Swaddling is split into its sigma path and
/// its beta path with the detached exponent frozen, matching the gradients
/// the training loss actually uses.
std::vector<NamedDiffFn> standard_diff_fns();

}  // namespace math
}  // namespace symphony
