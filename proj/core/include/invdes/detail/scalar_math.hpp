#pragma once

#include <cmath>

namespace invdes::ad::detail {

// Saturation cutoffs: beyond them the exact result is indistinguishable
// from the limit at double precision (softplus(54) ~ 54 + 4e-24, and
// 4e-24 is far below one ulp of any quantity it feeds).
inline constexpr double kSatHi = 36.0;   // exp(-36) ~ 2e-16
inline constexpr double kSatLo = -54.0;  // exp(-54) ~ 3.5e-24

inline double softplus1(double x) {
  if (x > kSatHi) return x;
  if (x < kSatLo) return 0.0;
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

inline double sigmoid(double x) {
  if (x > -kSatLo) return 1.0;
  if (x < kSatLo) return 0.0;
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log1p(exp(-|d|)) with the same saturation shortcut.
inline double log1p_exp_neg(double ad) {
  if (ad > -kSatLo) return 0.0;
  return std::log1p(std::exp(-ad));
}

}  // namespace invdes::ad::detail
