#include "photonshape/fitting.hpp"

#include <array>
#include <cmath>

#include "photonshape/error.hpp"

namespace photonshape {

Sin2Fit fit_sin2(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size(), ErrorCode::InvalidArgument, "fit abscissa and data differ in length");
  require(x.size() >= 3, ErrorCode::FitFailure, "sin² fit needs at least three points");
  std::array<std::array<double, 4>, 3> m{};
  for (std::size_t k = 0; k < x.size(); ++k) {
    const std::array<double, 3> basis = {1.0, std::cos(x[k]), std::sin(x[k])};
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) m[i][j] += basis[i] * basis[j];
      m[i][3] += basis[i] * y[k];
    }
  }
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int r = col + 1; r < 3; ++r) {
      if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
    }
    require(std::abs(m[piv][col]) > 1e-12 * static_cast<double>(x.size()), ErrorCode::FitFailure,
            "sin² fit is degenerate for these abscissae");
    std::swap(m[col], m[piv]);
    for (int r = 0; r < 3; ++r) {
      if (r == col) continue;
      const double f = m[r][col] / m[col][col];
      for (int c = col; c < 4; ++c) m[r][c] -= f * m[col][c];
    }
  }
  const double c0 = m[0][3] / m[0][0];
  const double c1 = m[1][3] / m[1][1];
  const double c2 = m[2][3] / m[2][2];
  const double half = std::hypot(c1, c2);
  require(half > 0.0, ErrorCode::FitFailure, "curve has no modulation; phase is undefined");

  Sin2Fit f;
  f.A = 2.0 * half;
  f.B = c0 - half;
  f.phi0 = 0.5 * std::atan2(c2, -c1);
  if (f.phi0 <= -M_PI / 2.0) f.phi0 += M_PI;
  double ss = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double s = std::sin(0.5 * x[k] + f.phi0);
    const double r = y[k] - (f.A * s * s + f.B);
    ss += r * r;
  }
  f.rms_residual = std::sqrt(ss / static_cast<double>(x.size()));
  return f;
}

double fitted_shift(const Sin2Fit& a, const Sin2Fit& b) {
  double s = std::fmod(2.0 * (a.phi0 - b.phi0), 2.0 * M_PI);
  if (s < 0.0) s += 2.0 * M_PI;
  return s;
}

}  // namespace photonshape
