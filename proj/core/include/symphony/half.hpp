#pragma once

#include <bit>
#include <cstdint>

namespace symphony {

/// IEEE 754 binary16 codec used by the replay buffer's half-precision mode.
/// Encoding rounds to nearest-even; decoding is exact.
inline std::uint16_t float_to_half(float value) {
  const std::uint32_t bits = std::bit_cast<std::uint32_t>(value);
  const std::uint32_t sign = (bits >> 16) & 0x8000u;
  std::uint32_t abs = bits & 0x7fffffffu;

  if (abs >= 0x7f800000u) {  // inf or nan
    const std::uint32_t mantissa = (abs > 0x7f800000u) ? 0x0200u : 0u;
    return static_cast<std::uint16_t>(sign | 0x7c00u | mantissa |
                                      ((abs >> 13) & 0x03ffu));
  }
  if (abs >= 0x477ff000u) {  // overflows half range -> inf
    return static_cast<std::uint16_t>(sign | 0x7c00u);
  }
  if (abs < 0x38800000u) {  // subnormal half (or zero)
    if (abs < 0x33000000u) {  // rounds to zero
      return static_cast<std::uint16_t>(sign);
    }
    const int shift = 126 - static_cast<int>(abs >> 23);
    std::uint32_t mant = (abs & 0x007fffffu) | 0x00800000u;
    const std::uint32_t dropped = mant & ((1u << shift) - 1u);
    mant >>= shift;
    const std::uint32_t halfway = 1u << (shift - 1);
    if (dropped > halfway || (dropped == halfway && (mant & 1u))) ++mant;
    return static_cast<std::uint16_t>(sign | mant);
  }
  // Normal range: rebias exponent, round mantissa to nearest-even.
  std::uint32_t out = (abs - 0x38000000u) >> 13;
  const std::uint32_t dropped = abs & 0x1fffu;
  if (dropped > 0x1000u || (dropped == 0x1000u && (out & 1u))) ++out;
  return static_cast<std::uint16_t>(sign | out);
}

inline float half_to_float(std::uint16_t h) {
  const std::uint32_t sign = static_cast<std::uint32_t>(h & 0x8000u) << 16;
  const std::uint32_t exp = (h >> 10) & 0x1fu;
  const std::uint32_t mant = h & 0x03ffu;

  std::uint32_t bits;
  if (exp == 0) {
    if (mant == 0) {
      bits = sign;  // signed zero
    } else {
      // Normalize the subnormal.
      int e = -1;
      std::uint32_t m = mant;
      do {
        ++e;
        m <<= 1;
      } while ((m & 0x0400u) == 0);
      bits = sign | ((127 - 15 - e) << 23) | ((m & 0x03ffu) << 13);
    }
  } else if (exp == 0x1f) {
    bits = sign | 0x7f800000u | (mant << 13);
  } else {
    bits = sign | ((exp + 127 - 15) << 23) | (mant << 13);
  }
  return std::bit_cast<float>(bits);
}

inline std::uint16_t double_to_half(double v) {
  return float_to_half(static_cast<float>(v));
}

inline double half_to_double(std::uint16_t h) {
  return static_cast<double>(half_to_float(h));
}

}  // namespace symphony
