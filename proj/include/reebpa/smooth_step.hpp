#pragma once

#include <cmath>

namespace reebpa {

/// C-infinity step: 0 for s <= 0, 1 for s >= 1, built from exp(-1/s).
inline double smooth_step(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / s);
  const double b = std::exp(-1.0 / (1.0 - s));
  return a / (a + b);
}

inline double smooth_step_derivative(double s) {
  if (s <= 0.0 || s >= 1.0) return 0.0;
  const double sigma = smooth_step(s);
  if (sigma == 0.0 || sigma == 1.0) return 0.0;
  return sigma * (1.0 - sigma) * (1.0 / (s * s) + 1.0 / ((1.0 - s) * (1.0 - s)));
}

/// 1 at s = 0, falling smoothly to 0 at |s| = 1; flat at both ends.
inline double smooth_bump(double s) { return 1.0 - smooth_step(std::abs(s)); }

}  // namespace reebpa
