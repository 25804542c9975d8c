#include <cmath>

#include "doctest.h"
#include "photonshape/angular.hpp"
#include "photonshape/cqed.hpp"
#include "photonshape/reference_data.hpp"

using namespace photonshape;
using namespace photonshape::angular;

// Reference values from an independent symbolic evaluation (sympy.physics.wigner).
TEST_CASE("3j symbols match symbolic values") {
  CHECK(wigner_3j(2, 2, 0, 0, 0, 0) == doctest::Approx(-0.57735026918962576).epsilon(1e-14));
  CHECK(wigner_3j(2, 2, 2, 2, -2, 0) == doctest::Approx(0.40824829046386302).epsilon(1e-14));
  CHECK(wigner_3j(4, 2, 2, 0, 0, 0) == doctest::Approx(0.36514837167011074).epsilon(1e-14));
  CHECK(wigner_3j(3, 2, 1, 1, 0, -1) == doctest::Approx(0.40824829046386302).epsilon(1e-14));
  CHECK(wigner_3j(6, 4, 2, -2, 2, 0) == doctest::Approx(0.27602622373694169).epsilon(1e-14));
  CHECK(wigner_3j(5, 3, 2, -1, 3, -2) == doctest::Approx(-0.12909944487358056).epsilon(1e-14));
}

TEST_CASE("6j symbols match symbolic values") {
  CHECK(wigner_6j(2, 2, 2, 2, 2, 2) == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
  CHECK(wigner_6j(1, 1, 2, 1, 1, 0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(wigner_6j(4, 4, 4, 2, 2, 2) == doctest::Approx(0.15275252316519467).epsilon(1e-14));
  CHECK(wigner_6j(1, 3, 2, 6, 4, 3) == doctest::Approx(0.22360679774997897).epsilon(1e-14));
  CHECK(wigner_6j(1, 3, 2, 2, 4, 3) == doctest::Approx(0.091287092917527686).epsilon(1e-14));
  CHECK(wigner_6j(5, 4, 1, 2, 3, 4) == doctest::Approx(0.19720265943665387).epsilon(1e-14));
}

TEST_CASE("selection rules give exact zeros") {
  CHECK(wigner_3j(2, 2, 2, 2, 2, 0) == 0.0);   // m sum != 0
  CHECK(wigner_3j(2, 2, 6, 0, 0, 0) == 0.0);   // triangle
  CHECK(wigner_3j(2, 2, 2, 0, 0, 0) == 0.0);   // odd J with all m = 0
  CHECK(wigner_3j(2, 2, 2, 4, -2, -2) == 0.0); // |m| > j
  CHECK(wigner_6j(2, 2, 6, 2, 2, 2) == 0.0);
  CHECK(dipole_coupling({3, 1, 3, 4, -2, 6, 2}) == 0.0);  // Δm = 2
  CHECK(dipole_coupling({3, 1, 3, 2, 0, 6, 0}) == 0.0);   // F = 1 -> F' = 3
}

TEST_CASE("3j orthogonality over m1, m2") {
  // Σ_{m1 m2} (2j3+1) (j1 j2 j3; m1 m2 m3)(j1 j2 j3'; m1 m2 m3) = δ_{j3 j3'}
  const int j1 = 3, j2 = 4;
  for (int j3 = 1; j3 <= 7; j3 += 2) {
    for (int j3p = 1; j3p <= 7; j3p += 2) {
      const int m3 = 1;
      double s = 0.0;
      for (int m1 = -j1; m1 <= j1; m1 += 2) {
        const int m2 = -m1 - m3;
        if (std::abs(m2) > j2) continue;
        s += (j3 + 1) * wigner_3j(j1, j2, j3, m1, m2, m3) * wigner_3j(j1, j2, j3p, m1, m2, m3);
      }
      CHECK(s == doctest::Approx(j3 == j3p ? 1.0 : 0.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("6j orthogonality") {
  // Σ_{j3} (2j3+1)(2j6+1){j1 j2 j3; j4 j5 j6}{j1 j2 j3; j4 j5 j6'} = δ
  const int j1 = 3, j2 = 2, j4 = 4, j5 = 3;
  for (int j6 = 2; j6 <= 6; j6 += 2) {
    for (int j6p = 2; j6p <= 6; j6p += 2) {
      double s = 0.0;
      for (int j3 = 1; j3 <= 5; j3 += 2) {
        s += (j3 + 1) * (j6 + 1) * wigner_6j(j1, j2, j3, j4, j5, j6) * wigner_6j(j1, j2, j3, j4, j5, j6p);
      }
      CHECK(s == doctest::Approx(j6 == j6p ? 1.0 : 0.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("D2 branching completeness for every excited state") {
  const ReferenceData& ref = default_reference_data();
  for (int Fp = 0; Fp <= 3; ++Fp) {
    for (int mp = -Fp; mp <= Fp; ++mp) {
      double s = 0.0;
      for (int F = 1; F <= 2; ++F) {
        for (int m = -F; m <= F; ++m) {
          s += std::pow(dipole_coupling({ref.two_I, ref.two_J_ground, ref.two_J_excited, 2 * F, 2 * m, 2 * Fp, 2 * mp}),
                        2);
        }
      }
      CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("Lambda-scheme couplings of the 87Rb D2 line") {
  // Standard hyperfine dipole formula evaluated symbolically and normalized
  // per upper state; signs in the same phase convention.
  const LevelScheme s = build_scheme({4.9, 2.4, 0.3, 3.03}, -20.0, Variant::ThreeLevel, default_reference_data());
  const auto& t = s.coupling_table;
  CHECK(t.c_s[0] == doctest::Approx(0.22360679774997897).epsilon(1e-13));
  CHECK(t.c_s[1] == doctest::Approx(-0.28867513459481285).epsilon(1e-13));
  CHECK(t.c_s[2] == doctest::Approx(-0.73029674334022137).epsilon(1e-13));
  CHECK(t.c_g[0] == doctest::Approx(-0.64549722436790273).epsilon(1e-13));
  CHECK(t.c_g[1] == doctest::Approx(0.5).epsilon(1e-13));
  // Squares are the familiar rational strengths.
  CHECK(t.c_s[0] * t.c_s[0] == doctest::Approx(1.0 / 20.0));
  CHECK(t.c_s[1] * t.c_s[1] == doctest::Approx(1.0 / 12.0));
  CHECK(t.c_s[2] * t.c_s[2] == doctest::Approx(8.0 / 15.0));
  CHECK(t.c_g[0] * t.c_g[0] == doctest::Approx(5.0 / 12.0));
}

TEST_CASE("F'=3 decays only into F=2") {
  const LevelScheme s = build_scheme({4.9, 2.4, 0.3, 3.03}, 0.0, Variant::ThreeLevel, default_reference_data());
  int n = 0;
  for (const auto& ch : s.coupling_table.full_decay_table) {
    if (ch.excited_F == 3) {
      CHECK(ch.ground_F == 2);
      ++n;
    }
  }
  CHECK(n > 0);
}
