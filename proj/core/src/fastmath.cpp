#include "symphony/fastmath.hpp"

#include <cmath>
#include <cstdint>

namespace symphony::fastmath {
namespace {

// fdlibm sin/cos kernel coefficients, valid on |r| <= pi/4.
constexpr double kS1 = -1.66666666666666324348e-01;
constexpr double kS2 = 8.33333333332248946124e-03;
constexpr double kS3 = -1.98412698298579493134e-04;
constexpr double kS4 = 2.75573137070700676789e-06;
constexpr double kS5 = -2.50507602534068634195e-08;
constexpr double kS6 = 1.58969099521155010221e-10;

constexpr double kC1 = 4.16666666666666019037e-02;
constexpr double kC2 = -1.38888888888741095749e-03;
constexpr double kC3 = 2.48015872894767294178e-05;
constexpr double kC4 = -2.75573143513906633035e-07;
constexpr double kC5 = 2.08757232129817482790e-09;
constexpr double kC6 = -1.13596475577881948265e-11;

constexpr double kInvPio2 = 6.36619772367581382433e-01;  // 2/pi
constexpr double kPio2Hi = 1.57079632673412561417e+00;   // top 33 bits of pi/2
constexpr double kPio2Lo = 6.07710050650619224932e-11;   // pi/2 - hi
constexpr double kPio2Lo2 = 2.02226624879595063154e-21;  // next correction

// Round-to-nearest via the 2^52 shifter; exact for |v| < 2^51.
constexpr double kShifter = 6755399441055744.0;  // 1.5 * 2^52

constexpr double kMaxFastArg = 1.0e6;

inline double sin_poly(double r) {
  const double z = r * r;
  return r + r * z *
                 (kS1 + z * (kS2 + z * (kS3 + z * (kS4 + z * (kS5 + z * kS6)))));
}

inline double cos_poly(double r) {
  const double z = r * r;
  return 1.0 - 0.5 * z +
         z * z * (kC1 + z * (kC2 + z * (kC3 + z * (kC4 + z * (kC5 + z * kC6)))));
}

// Branchless quadrant selection in plain double arithmetic so the loop
// vectorizes. Valid only when every |x| <= kMaxFastArg.
void sincos_fast(const double* x, double* s, double* c, std::ptrdiff_t n) {
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const double v = x[i];
    const double shifted = v * kInvPio2 + kShifter;
    const double kd = shifted - kShifter;
    const auto bits = static_cast<std::int64_t>(shifted);  // low bits hold k
    const double r = ((v - kd * kPio2Hi) - kd * kPio2Lo) - kd * kPio2Lo2;
    const double sr = sin_poly(r);
    const double cr = cos_poly(r);
    const double swap = static_cast<double>(bits & 1);        // q odd: swap
    const double sign_s = 1.0 - static_cast<double>(bits & 2);  // q in {2,3}
    const double sign_c =
        1.0 - static_cast<double>((bits + 1) & 2);  // q in {1,2}
    const double base_s = sr + swap * (cr - sr);
    const double base_c = cr + swap * (sr - cr);
    s[i] = sign_s * base_s;
    c[i] = sign_c * base_c;
  }
}

}  // namespace

void sincos(const double* x, double* s, double* c, std::ptrdiff_t n) {
  constexpr std::ptrdiff_t kBlock = 512;
  for (std::ptrdiff_t start = 0; start < n; start += kBlock) {
    const std::ptrdiff_t len = std::min(kBlock, n - start);
    double max_abs = 0.0;
    for (std::ptrdiff_t i = 0; i < len; ++i) {
      max_abs = std::max(max_abs, std::fabs(x[start + i]));
    }
    if (max_abs <= kMaxFastArg) {  // false for NaN: falls through to libm
      sincos_fast(x + start, s + start, c + start, len);
    } else {
      for (std::ptrdiff_t i = start; i < start + len; ++i) {
        s[i] = std::sin(x[i]);
        c[i] = std::cos(x[i]);
      }
    }
  }
}

void sigmoid(const double* x, double* out, std::ptrdiff_t n) {
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[i] = 1.0 / (1.0 + std::exp(-x[i]));
  }
}

namespace {

// exp minimax polynomial on [-1.5, 1.5] (Taylor through x^12 is already
// below 1e-13 relative on this range).
inline double exp_bounded(double t) {
  double acc = 1.0 / 479001600.0;  // 1/12!
  acc = acc * t + 1.0 / 39916800.0;
  acc = acc * t + 1.0 / 3628800.0;
  acc = acc * t + 1.0 / 362880.0;
  acc = acc * t + 1.0 / 40320.0;
  acc = acc * t + 1.0 / 5040.0;
  acc = acc * t + 1.0 / 720.0;
  acc = acc * t + 1.0 / 120.0;
  acc = acc * t + 1.0 / 24.0;
  acc = acc * t + 1.0 / 6.0;
  acc = acc * t + 0.5;
  acc = acc * t + 1.0;
  acc = acc * t + 1.0;
  return acc;
}

}  // namespace

void sigmoid_bounded(const double* x, double* out, std::ptrdiff_t n,
                     double bound) {
  if (!(bound <= 1.5)) {
    sigmoid(x, out, n);
    return;
  }
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[i] = 1.0 / (1.0 + exp_bounded(-x[i]));
  }
}

}  // namespace symphony::fastmath
