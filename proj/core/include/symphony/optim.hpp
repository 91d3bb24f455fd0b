#pragma once

#include <vector>

#include "symphony/math_core.hpp"
#include "symphony/nets.hpp"

namespace symphony {

/// AdamW variant with no bias correction, additive decoupled weight decay and
/// the printed divisor m/(v + eps):
///   m <- b1 m + (1-b1) g
///   v <- b2 v + (1-b2) g^2
///   theta <- theta - lr (m/(v + eps) + lambda theta)
/// A sqrt(v) divisor is available behind `sqrt_divisor` for comparison runs.
class AdamW {
 public:
  struct Options {
    double lr = 1e-4;
    double beta1 = math::kGoldenAlpha;  // alpha = 1/phi
    double beta2 = 0.995;               // 1 - tau
    double weight_decay = 0.01;
    double epsilon = 1e-8;
    bool sqrt_divisor = false;
  };

  AdamW(std::vector<Param*> params, const Options& options);

  /// Applies one update from the accumulated gradients. If any gradient is
  /// non-finite the step is rejected: parameters and moments stay untouched
  /// and the rejection counter grows.
  bool step();

  const Options& options() const { return options_; }
  void set_lr(double lr) { options_.lr = lr; }
  std::int64_t rejected_steps() const { return rejected_steps_; }

  const std::vector<Param*>& params() const { return params_; }
  std::vector<Mat>& moments_m() { return m_; }
  std::vector<Mat>& moments_v() { return v_; }

 private:
  std::vector<Param*> params_;
  Options options_;
  std::vector<Mat> m_, v_;
  std::int64_t rejected_steps_ = 0;
};

}  // namespace symphony
