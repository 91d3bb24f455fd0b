#pragma once

#include <cmath>
#include <cstddef>

namespace symphony::fastmath {

/// Simultaneous sin/cos over an array. Arguments with |x| <= 1e6 take a
/// Cody-Waite reduced polynomial path (auto-vectorizable, ~1 ulp); larger
/// magnitudes fall back to libm. Aliasing between x and outputs is allowed
/// only if s != c.
void sincos(const double* x, double* s, double* c, std::ptrdiff_t n);

/// Logistic sigmoid over an array.
void sigmoid(const double* x, double* out, std::ptrdiff_t n);

/// Sigmoid for arguments known to lie in [-bound, bound] with bound <= 1.5;
/// uses a short polynomial for exp. Falls back to the generic path for
/// larger bounds.
void sigmoid_bounded(const double* x, double* out, std::ptrdiff_t n,
                     double bound);

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace symphony::fastmath
