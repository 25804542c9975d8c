#pragma once

#include <vector>

namespace photonshape {

// y ≈ A·sin²(x/2 + φ0) + B with A >= 0 and φ0 in (-π/2, π/2]. Linear least
// squares on {1, cos x, sin x}.
struct Sin2Fit {
  double A = 0.0;
  double B = 0.0;
  double phi0 = 0.0;
  double rms_residual = 0.0;
};

Sin2Fit fit_sin2(const std::vector<double>& x, const std::vector<double>& y);

// Shift s in [0, 2π) with curve_b(x) ≈ curve_a(x - s), from two fits.
double fitted_shift(const Sin2Fit& a, const Sin2Fit& b);

}  // namespace photonshape
