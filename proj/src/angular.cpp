#include "photonshape/angular.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>

namespace photonshape::angular {
namespace {

constexpr int kMaxFactorial = 170;

const std::array<long double, kMaxFactorial + 1>& factorials() {
  static const auto table = [] {
    std::array<long double, kMaxFactorial + 1> f{};
    f[0] = 1.0L;
    for (int n = 1; n <= kMaxFactorial; ++n) f[n] = f[n - 1] * n;
    return f;
  }();
  return table;
}

// n given doubled; n must be even and non-negative.
long double fact2(int two_n) { return factorials()[two_n / 2]; }

bool is_integer(int two_x) { return two_x % 2 == 0; }

bool triangle(int a, int b, int c) {
  if (a < 0 || b < 0 || c < 0) return false;
  if (!is_integer(a + b + c)) return false;
  return c <= a + b && c >= std::abs(a - b);
}

long double triangle_delta(int a, int b, int c) {
  return fact2(a + b - c) * fact2(a - b + c) * fact2(-a + b + c) / fact2(a + b + c + 2);
}

double phase(int two_exponent) {
  // two_exponent must be even; returns (-1)^(two_exponent/2)
  return ((two_exponent / 2) % 2 == 0) ? 1.0 : -1.0;
}

bool valid_projection(int two_j, int two_m) {
  return std::abs(two_m) <= two_j && is_integer(two_j + two_m);
}

}  // namespace

double wigner_3j(int j1, int j2, int j3, int m1, int m2, int m3) {
  if (m1 + m2 + m3 != 0) return 0.0;
  if (!triangle(j1, j2, j3)) return 0.0;
  if (!valid_projection(j1, m1) || !valid_projection(j2, m2) || !valid_projection(j3, m3)) {
    return 0.0;
  }
  if (std::max({j1 + j2 + j3, j1 + m1, j2 + m2, j3 + m3}) / 2 > kMaxFactorial - 1) return 0.0;

  // Racah sum over k with denominators k!, (j1+j2-j3-k)!, (j1-m1-k)!,
  // (j2+m2-k)!, (j3-j2+m1+k)!, (j3-j1-m2+k)!; everything doubled.
  const int kmin = std::max({0, j2 - j3 - m1, j1 - j3 + m2});
  const int kmax = std::min({j1 + j2 - j3, j1 - m1, j2 + m2});
  long double sum = 0.0L;
  for (int k = kmin; k <= kmax; k += 2) {
    const long double denom = fact2(k) * fact2(j1 + j2 - j3 - k) * fact2(j1 - m1 - k) *
                              fact2(j2 + m2 - k) * fact2(j3 - j2 + m1 + k) *
                              fact2(j3 - j1 - m2 + k);
    sum += phase(k) / denom;
  }
  const long double norm = std::sqrt(triangle_delta(j1, j2, j3) * fact2(j1 + m1) *
                                     fact2(j1 - m1) * fact2(j2 + m2) * fact2(j2 - m2) *
                                     fact2(j3 + m3) * fact2(j3 - m3));
  return static_cast<double>(phase(j1 - j2 - m3) * norm * sum);
}

double wigner_6j(int j1, int j2, int j3, int j4, int j5, int j6) {
  if (!triangle(j1, j2, j3) || !triangle(j1, j5, j6) || !triangle(j4, j2, j6) ||
      !triangle(j4, j5, j3)) {
    return 0.0;
  }
  const int a1 = j1 + j2 + j3;
  const int a2 = j1 + j5 + j6;
  const int a3 = j4 + j2 + j6;
  const int a4 = j4 + j5 + j3;
  const int b1 = j1 + j2 + j4 + j5;
  const int b2 = j2 + j3 + j5 + j6;
  const int b3 = j3 + j1 + j6 + j4;
  if (std::max({b1, b2, b3}) / 2 + 1 > kMaxFactorial) return 0.0;

  const int tmin = std::max({a1, a2, a3, a4});
  const int tmax = std::min({b1, b2, b3});
  long double sum = 0.0L;
  for (int t = tmin; t <= tmax; t += 2) {
    const long double denom = fact2(t - a1) * fact2(t - a2) * fact2(t - a3) * fact2(t - a4) *
                              fact2(b1 - t) * fact2(b2 - t) * fact2(b3 - t);
    sum += phase(t) * fact2(t + 2) / denom;
  }
  const long double norm = std::sqrt(triangle_delta(j1, j2, j3) * triangle_delta(j1, j5, j6) *
                                     triangle_delta(j4, j2, j6) * triangle_delta(j4, j5, j3));
  return static_cast<double>(norm * sum);
}

double dipole_coupling(const DipoleTransition& t) {
  if (!valid_projection(t.two_F, t.two_mF) || !valid_projection(t.two_Fp, t.two_mFp)) return 0.0;
  const int two_q = t.two_mF - t.two_mFp;
  if (std::abs(two_q) > 2) return 0.0;
  const double three_j = wigner_3j(t.two_Fp, 2, t.two_F, t.two_mFp, two_q, -t.two_mF);
  if (three_j == 0.0) return 0.0;
  const double six_j = wigner_6j(t.two_J, t.two_Jp, 2, t.two_Fp, t.two_F, t.two_I);
  if (six_j == 0.0) return 0.0;
  // (-1)^(F'-1+mF) (-1)^(F'+J+1+I)
  const int two_exponent = (t.two_Fp - 2 + t.two_mF) + (t.two_Fp + t.two_J + 2 + t.two_I);
  const double weight = std::sqrt(static_cast<double>((t.two_F + 1) * (t.two_Fp + 1) *
                                                      (t.two_Jp + 1)));
  return phase(two_exponent) * weight * three_j * six_j;
}

}  // namespace photonshape::angular
