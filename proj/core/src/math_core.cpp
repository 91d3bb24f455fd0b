#include "symphony/math_core.hpp"

#include <cmath>
#include <stdexcept>

#include "symphony/fastmath.hpp"

namespace symphony {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kE = 2.71828182845904523536;

double schedule_weight(double i_n, ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::kBuffer:
      return std::tanh(std::pow(kPi * i_n, kE));
    case ScheduleKind::kTargetCritic:
      return std::tanh(std::pow(kPi * (1.0 - i_n), kE));
    case ScheduleKind::kBufferDimpled: {
      const double d = (i_n - 1.0) / 0.02;
      return std::tanh(std::pow(kPi * i_n, kPi)) - 0.02 * std::exp(-d * d);
    }
    case ScheduleKind::kTargetCriticDimpled: {
      const double d = i_n / 0.02;
      return std::tanh(std::pow(kPi * (1.0 - i_n), kPi)) - 0.02 * std::exp(-d * d);
    }
  }
  return 0.0;
}

}  // namespace

WeightSchedule::WeightSchedule(int length, ScheduleKind kind) : kind_(kind) {
  if (length < 2) {
    throw std::invalid_argument("WeightSchedule: length must be >= 2");
  }
  weights_.resize(length);
  for (int i = 0; i < length; ++i) {
    const double i_n = static_cast<double>(i + 1) / static_cast<double>(length);
    weights_[i] = std::max(schedule_weight(i_n, kind), 0.0);
  }
  weights_ /= weights_.sum();
}

WeightSchedule WeightSchedule::uniform(int length) {
  if (length < 2) {
    throw std::invalid_argument("WeightSchedule: length must be >= 2");
  }
  WeightSchedule s;
  s.kind_ = ScheduleKind::kBuffer;
  s.weights_ = Eigen::VectorXd::Constant(length, 1.0 / length);
  return s;
}

namespace math {

ResinePoint resine_point(double x, double s) {
  const double sig = fastmath::sigmoid(s);
  const double u = x / sig;
  const double t = std::sin(u);
  const double cu = std::cos(u);
  const double g = fastmath::sigmoid(1.5 * t);
  // F = sig * t * g with g = sigmoid(1.5 sin(u)), u = x/sig.
  const double chain = cu * g * (1.0 + 1.5 * t * (1.0 - g));
  const double d_x = chain;
  const double d_sigma = t * g - u * chain;
  return {sig * t * g, d_x, d_sigma * sig * (1.0 - sig)};
}

ResineEval resine(const Eigen::VectorXd& x, const Eigen::VectorXd& s) {
  if (x.size() != s.size()) {
    throw std::invalid_argument("resine: x and s must have equal length");
  }
  ResineEval out;
  const auto n = x.size();
  out.value.resize(n);
  out.d_x.resize(n);
  out.d_s.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const ResinePoint p = resine_point(x[i], s[i]);
    out.value[i] = p.value;
    out.d_x[i] = p.d_x;
    out.d_s[i] = p.d_s;
  }
  return out;
}

double rehse(const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
  const auto n = x.size();
  double acc = 0.0;
  if (grad) grad->resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    acc += rehse_term(x[i]);
    if (grad) (*grad)[i] = rehse_dterm(x[i]) / static_cast<double>(n);
  }
  return acc / static_cast<double>(n);
}

double rehae(const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
  const auto n = x.size();
  double acc = 0.0;
  if (grad) grad->resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    acc += rehae_term(x[i]);
    if (grad) (*grad)[i] = rehae_dterm(x[i]) / static_cast<double>(n);
  }
  return acc / static_cast<double>(n);
}

double omega_barrier(double x) {
  if (!(x > 0.0 && x < 1.0)) {
    throw std::domain_error("omega_barrier: argument must be in (0, 1)");
  }
  return std::log((1.0 + x) / (1.0 - x));
}

double omega_barrier_deriv(double x) {
  if (!(x > 0.0 && x < 1.0)) {
    throw std::domain_error("omega_barrier: argument must be in (0, 1)");
  }
  return 2.0 / (1.0 - x * x);
}

double omega_helper(double x) {
  if (!(x > 0.0)) {
    throw std::domain_error("omega_helper: argument must be positive");
  }
  return x * std::log(x);
}

double omega_helper_deriv(double x) {
  if (!(x > 0.0)) {
    throw std::domain_error("omega_helper: argument must be positive");
  }
  return std::log(x) + 1.0;
}

double full_swaddling(const Eigen::ArrayXXd& sigma, const Eigen::ArrayXXd& beta,
                      Eigen::ArrayXXd* d_sigma, Eigen::ArrayXXd* d_beta) {
  if (sigma.rows() != beta.rows() || sigma.cols() != beta.cols()) {
    throw std::invalid_argument("full_swaddling: shape mismatch");
  }
  constexpr double kSlack = 1e-12;
  const double count = static_cast<double>(sigma.size());
  if (d_sigma) d_sigma->resize(sigma.rows(), sigma.cols());
  if (d_beta) d_beta->resize(beta.rows(), beta.cols());

  double acc = 0.0;
  for (Eigen::Index j = 0; j < sigma.cols(); ++j) {
    for (Eigen::Index i = 0; i < sigma.rows(); ++i) {
      const double sg = sigma(i, j);
      const double bt = beta(i, j);
      if (sg < kClipLo - kSlack || sg > kClipHi + kSlack ||
          bt < kClipLo - kSlack || bt > kClipHi + kSlack) {
        throw std::domain_error("full_swaddling: inputs must be pre-clipped");
      }
      const double p = 1.0 / bt;  // beta is detached inside the exponent
      const double y = std::pow(sg, p);
      const double b2 = bt * bt;
      // sigma^(1/beta) underflows to 0 for small beta; the barrier and its
      // sigma-gradient both vanish in that limit.
      acc += (y > 0.0 ? omega_barrier(y) : 0.0) + bt * omega_helper(sg) +
             omega_barrier(b2);
      if (d_sigma) {
        const double d1 =
            y > 0.0 ? omega_barrier_deriv(y) * p * std::pow(sg, p - 1.0) : 0.0;
        (*d_sigma)(i, j) = (d1 + bt * omega_helper_deriv(sg)) / count;
      }
      if (d_beta) {
        (*d_beta)(i, j) =
            (omega_helper(sg) + omega_barrier_deriv(b2) * 2.0 * bt) / count;
      }
    }
  }
  return acc / count;
}

double control_cost_baseline(const Eigen::VectorXd& a, double beta) {
  if (a.size() == 0) return 0.0;
  return beta * a.squaredNorm() / static_cast<double>(a.size());
}

std::vector<NamedDiffFn> standard_diff_fns() {
  using Eigen::VectorXd;
  std::vector<NamedDiffFn> fns;

  fns.push_back(
      {"rehse",
       {[](const VectorXd& x) {
          VectorXd out(1);
          out[0] = rehse(x);
          return out;
        },
        [](const VectorXd& x, const VectorXd& u) {
          VectorXd g;
          rehse(x, &g);
          return VectorXd(u[0] * g);
        }},
       [](Rng& rng) {
         VectorXd x(5);
         for (int i = 0; i < 5; ++i) x[i] = rng.uniform(-4.0, 4.0);
         return x;
       }});

  fns.push_back(
      {"rehae",
       {[](const VectorXd& x) {
          VectorXd out(1);
          out[0] = rehae(x);
          return out;
        },
        [](const VectorXd& x, const VectorXd& u) {
          VectorXd g;
          rehae(x, &g);
          return VectorXd(u[0] * g);
        }},
       [](Rng& rng) {
         VectorXd x(5);
         // Keep away from the |x| kink at exactly zero.
         for (int i = 0; i < 5; ++i) {
           const double v = rng.uniform(0.05, 4.0);
           x[i] = rng.uniform() < 0.5 ? -v : v;
         }
         return x;
       }});

  // ReSine over stacked [x; s]; gradients flow to both halves.
  fns.push_back(
      {"resine",
       {[](const VectorXd& xs) {
          const auto n = xs.size() / 2;
          return VectorXd(resine(xs.head(n), xs.tail(n)).value);
        },
        [](const VectorXd& xs, const VectorXd& u) {
          const auto n = xs.size() / 2;
          const ResineEval e = resine(xs.head(n), xs.tail(n));
          VectorXd g(xs.size());
          g.head(n) = u.array() * e.d_x.array();
          g.tail(n) = u.array() * e.d_s.array();
          return g;
        }},
       [](Rng& rng) {
         VectorXd xs(8);
         for (int i = 0; i < 4; ++i) xs[i] = rng.uniform(-3.0, 3.0);
         for (int i = 4; i < 8; ++i) xs[i] = rng.uniform(-2.0, 2.0);
         return xs;
       }});

  fns.push_back(
      {"omega_barrier",
       {[](const VectorXd& x) {
          VectorXd out(1);
          out[0] = omega_barrier(x[0]);
          return out;
        },
        [](const VectorXd& x, const VectorXd& u) {
          VectorXd g(1);
          g[0] = u[0] * omega_barrier_deriv(x[0]);
          return g;
        }},
       [](Rng& rng) {
         VectorXd x(1);
         x[0] = rng.uniform(0.05, 0.95);
         return x;
       }});

  fns.push_back(
      {"omega_helper",
       {[](const VectorXd& x) {
          VectorXd out(1);
          out[0] = omega_helper(x[0]);
          return out;
        },
        [](const VectorXd& x, const VectorXd& u) {
          VectorXd g(1);
          g[0] = u[0] * omega_helper_deriv(x[0]);
          return g;
        }},
       [](Rng& rng) {
         VectorXd x(1);
         x[0] = rng.uniform(0.05, 0.95);
         return x;
       }});

  // Swaddling as a function of sigma (beta fixed); sigma's shipped gradient
  // is the true derivative, detachment only affects beta.
  fns.push_back(
      {"swaddling_sigma",
       {[](const VectorXd& sg) {
          const Eigen::ArrayXXd sigma = sg.transpose().array();
          const Eigen::ArrayXXd beta =
              Eigen::ArrayXXd::Constant(1, sg.size(), 0.21);
          VectorXd out(1);
          out[0] = full_swaddling(sigma, beta);
          return out;
        },
        [](const VectorXd& sg, const VectorXd& u) {
          const Eigen::ArrayXXd sigma = sg.transpose().array();
          const Eigen::ArrayXXd beta =
              Eigen::ArrayXXd::Constant(1, sg.size(), 0.21);
          Eigen::ArrayXXd d_sigma;
          full_swaddling(sigma, beta, &d_sigma);
          return VectorXd(u[0] * d_sigma.transpose().matrix());
        }},
       [](Rng& rng) {
         VectorXd x(3);
         for (int i = 0; i < 3; ++i) x[i] = rng.uniform(0.08, 0.9);
         return x;
       }});

  // Swaddling as a function of beta with the exponent frozen at the base
  // beta, which is exactly the detached-gradient contract.
  fns.push_back(
      {"swaddling_beta",
       {[](const VectorXd& bt) {
          constexpr double kSigma0 = 0.37;
          constexpr double kBetaFrozen = 0.21;
          double acc = 0.0;
          for (Eigen::Index i = 0; i < bt.size(); ++i) {
            acc += omega_barrier(std::pow(kSigma0, 1.0 / kBetaFrozen)) +
                   bt[i] * omega_helper(kSigma0) +
                   omega_barrier(bt[i] * bt[i]);
          }
          VectorXd out(1);
          out[0] = acc / static_cast<double>(bt.size());
          return out;
        },
        [](const VectorXd& bt, const VectorXd& u) {
          constexpr double kSigma0 = 0.37;
          const Eigen::ArrayXXd sigma =
              Eigen::ArrayXXd::Constant(1, bt.size(), kSigma0);
          Eigen::ArrayXXd d_beta;
          full_swaddling(sigma, bt.transpose().array(), nullptr, &d_beta);
          return VectorXd(u[0] * d_beta.transpose().matrix());
        }},
       [](Rng& rng) {
         VectorXd x(3);
         for (int i = 0; i < 3; ++i) x[i] = rng.uniform(0.08, 0.9);
         return x;
       }});

  fns.push_back(
      {"control_cost",
       {[](const VectorXd& a) {
          VectorXd out(1);
          out[0] = control_cost_baseline(a, 0.1);
          return out;
        },
        [](const VectorXd& a, const VectorXd& u) {
          return VectorXd(u[0] * 0.1 * 2.0 * a / static_cast<double>(a.size()));
        }},
       [](Rng& rng) {
         VectorXd x(4);
         for (int i = 0; i < 4; ++i) x[i] = rng.uniform(-2.0, 2.0);
         return x;
       }});

  return fns;
}

FiniteDiffReport finite_diff_check(const DiffFn& f, const Eigen::VectorXd& x,
                                   double step,
                                   const Eigen::VectorXd* upstream) {
  const Eigen::VectorXd f0 = f.evaluate(x);
  const Eigen::VectorXd u =
      upstream ? *upstream : Eigen::VectorXd::Ones(f0.size());

  FiniteDiffReport report;
  report.analytic = f.gradient(x, u);
  report.numeric.resize(x.size());
  report.rel_error.resize(x.size());

  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + step;
    const double plus = u.dot(f.evaluate(probe));
    probe[i] = x[i] - step;
    const double minus = u.dot(f.evaluate(probe));
    probe[i] = x[i];
    report.numeric[i] = (plus - minus) / (2.0 * step);

    const double a = report.analytic[i];
    const double n = report.numeric[i];
    const double scale = std::max({std::abs(a), std::abs(n), 1e-6});
    report.rel_error[i] = std::abs(a - n) / scale;
    if (report.rel_error[i] > report.max_rel_error) {
      report.max_rel_error = report.rel_error[i];
      report.worst_coord = static_cast<int>(i);
    }
  }
  return report;
}

}  // namespace math
}  // namespace symphony
