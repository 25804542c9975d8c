#include "photonshape/cqed.hpp"

#include <algorithm>
#include <cmath>

#include "photonshape/angular.hpp"
#include "photonshape/error.hpp"
#include "photonshape/parallel.hpp"
#include "photonshape/units.hpp"

namespace photonshape {
namespace {

struct RawCoeffs {
  std::array<cplx, 3> a;
  double b;
  cplx K;
  cplx L;  // uncalibrated, prefactor ½√(2γC)
};

RawCoeffs raw_coeffs(const CqedParams& p, const std::array<double, 2>& c_g,
                     const std::array<double, 3>& c_s, const std::array<double, 3>& delta_mhz) {
  const double gamma = units::angular(p.gamma);
  const double kappa = units::angular(p.kappa());
  const double g = units::angular(p.g);
  const double C = p.cooperativity();

  RawCoeffs r{};
  for (int j = 0; j < 3; ++j) {
    const double gj = j < 2 ? c_g[j] * g : 0.0;
    const double Cj = gj * gj / (2.0 * kappa * gamma);
    r.a[j] = cplx(gamma * (1.0 + 2.0 * Cj), units::angular(delta_mhz[j]));
  }
  r.b = (c_g[0] * g) * (c_g[1] * g) / kappa;

  const cplx det = r.a[0] * r.a[1] - r.b * r.b;
  const double scale = std::abs(r.a[0] * r.a[1]) + r.b * r.b;
  if (std::abs(det) <= 1e-12 * scale) {
    fail(ErrorCode::DegenerateDenominator, "a1*a2 - b^2 vanishes");
  }
  const double cs1 = c_s[0], cs2 = c_s[1], cs3 = c_s[2];
  cplx bracket = (cs1 * cs1 * r.a[1] + cs2 * cs2 * r.a[0] - 2.0 * cs1 * cs2 * r.b) / det;
  if (cs3 != 0.0) bracket += cs3 * cs3 / r.a[2];
  r.K = 0.25 * bracket;

  const cplx numer = c_g[0] * (r.a[1] * cs1 - cs2 * r.b) + c_g[1] * (r.a[0] * cs2 - cs1 * r.b);
  r.L = 0.5 * std::sqrt(2.0 * gamma * C) * numer / (r.b * r.b - r.a[0] * r.a[1]);
  return r;
}

bool in_list(const std::vector<int>& v, int x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

}  // namespace

void validate(const CqedParams& p) {
  const auto positive = [](double x) { return std::isfinite(x) && x > 0.0; };
  require(positive(p.g) && positive(p.kappa_c) && positive(p.kappa_l) && positive(p.gamma),
          ErrorCode::InvalidArgument, "cavity QED rates must be finite and strictly positive");
}

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::OneLevel: return "one-level";
    case Variant::TwoLevel: return "two-level";
    case Variant::ThreeLevel: return "three-level";
  }
  return "?";
}

const char* coupling_mode_name(CouplingMode m) {
  return m == CouplingMode::Unit ? "unit" : "clebsch-gordan";
}

Variant parse_variant(const std::string& name) {
  if (name == "one-level") return Variant::OneLevel;
  if (name == "two-level") return Variant::TwoLevel;
  if (name == "three-level") return Variant::ThreeLevel;
  fail(ErrorCode::Configuration, "unknown model variant '" + name + "'");
}

CouplingMode parse_coupling_mode(const std::string& name) {
  if (name == "clebsch-gordan") return CouplingMode::ClebschGordan;
  if (name == "unit") return CouplingMode::Unit;
  fail(ErrorCode::Configuration, "unknown coupling mode '" + name + "'");
}

int active_manifolds(Variant v) {
  switch (v) {
    case Variant::OneLevel: return 1;
    case Variant::TwoLevel: return 2;
    case Variant::ThreeLevel: return 3;
  }
  return 3;
}

std::array<double, 3> LevelScheme::detunings() const {
  return {delta - hyperfine_offsets[0], delta - hyperfine_offsets[1],
          delta - hyperfine_offsets[2]};
}

LevelScheme build_scheme(const CqedParams& params, double delta_mhz, Variant variant,
                         const ReferenceData& ref, CouplingMode couplings) {
  validate(params);
  require(std::isfinite(delta_mhz), ErrorCode::InvalidArgument, "detuning must be finite");
  require(ref.excited_manifolds.size() == 3, ErrorCode::Configuration,
          "reference data must model exactly three excited manifolds");
  require(in_list(ref.ground_manifolds, ref.lambda_ground_F) &&
              in_list(ref.ground_manifolds, ref.lambda_storage_F),
          ErrorCode::Configuration, "lambda states must lie in modelled ground manifolds");

  LevelScheme s;
  s.variant = variant;
  s.couplings = couplings;
  s.delta = delta_mhz;
  s.reference = ref;
  for (int j = 0; j < 3; ++j) s.hyperfine_offsets[j] = ref.hyperfine_offset_mhz(ref.excited_manifolds[j]);

  const auto coupling = [&](int F, int m, int Fp, int mp) {
    return angular::dipole_coupling({ref.two_I, ref.two_J_ground, ref.two_J_excited, 2 * F, 2 * m,
                                     2 * Fp, 2 * mp});
  };

  CouplingTable& t = s.coupling_table;
  for (int j = 0; j < 3; ++j) {
    const int Fp = ref.excited_manifolds[j];
    t.c_s[j] = couplings == CouplingMode::Unit
                   ? 1.0
                   : coupling(ref.lambda_storage_F, ref.lambda_storage_m, Fp, ref.lambda_excited_m);
    if (j < 2) {
      t.c_g[j] = couplings == CouplingMode::Unit
                     ? 1.0
                     : coupling(ref.lambda_ground_F, ref.lambda_ground_m, Fp, ref.lambda_excited_m);
    }
  }
  if (variant == Variant::OneLevel) {
    t.c_s[1] = t.c_s[2] = 0.0;
    t.c_g[1] = 0.0;
  } else if (variant == Variant::TwoLevel) {
    t.c_s[2] = 0.0;
  }

  // Excited states reachable by the π-polarized control from the storage manifold.
  const int F_storage = ref.lambda_storage_F;
  for (int Fp : ref.excited_manifolds) {
    const int mmax = std::min(Fp, F_storage);
    for (int mp = -mmax; mp <= mmax; ++mp) {
      for (int F : ref.ground_manifolds) {
        for (int q = -1; q <= 1; ++q) {
          const int m = mp + q;
          if (std::abs(m) > F) continue;
          const double c = coupling(F, m, Fp, mp);
          if (c != 0.0) t.full_decay_table.push_back({Fp, mp, F, m, q, c});
        }
      }
    }
  }
  return s;
}

double calibration_factor(const CqedParams& params) {
  validate(params);
  const RawCoeffs r = raw_coeffs(params, {1.0, 0.0}, {1.0, 0.0, 0.0}, {0.0, 0.0, 0.0});
  const double C = params.cooperativity();
  const double raw = std::norm(r.L) / (2.0 * r.K.real());
  return (2.0 * C / (2.0 * C + 1.0)) / raw;
}

AdiabaticCoeffs adiabatic_coeffs(const CqedParams& params, const LevelScheme& scheme) {
  validate(params);
  const RawCoeffs r =
      raw_coeffs(params, scheme.coupling_table.c_g, scheme.coupling_table.c_s, scheme.detunings());
  AdiabaticCoeffs c;
  c.a = r.a;
  c.b = r.b;
  c.K = r.K;
  c.calibration = calibration_factor(params);
  c.L = std::sqrt(c.calibration) * r.L;
  return c;
}

Efficiency emission_efficiency(const CqedParams& params, const AdiabaticCoeffs& coeffs) {
  require(coeffs.K.real() > 0.0, ErrorCode::InvalidArgument,
          "Re K must be positive (no control coupling?)");
  Efficiency e;
  e.value = params.escape_efficiency() * std::norm(coeffs.L) / (2.0 * coeffs.K.real());
  e.exceeds_unity = e.value > 1.0 + 1e-12;
  return e;
}

Efficiency emission_efficiency(const CqedParams& params, const LevelScheme& scheme) {
  return emission_efficiency(params, adiabatic_coeffs(params, scheme));
}

std::vector<SweepPoint> efficiency_sweep(const CqedParams& params, Variant variant,
                                         double delta_min, double delta_max, int n_points,
                                         const ReferenceData& reference, CouplingMode couplings,
                                         int threads) {
  validate(params);
  require(n_points >= 2, ErrorCode::InvalidArgument, "sweep needs at least two points");
  require(std::isfinite(delta_min) && std::isfinite(delta_max) && delta_max > delta_min,
          ErrorCode::InvalidArgument, "sweep range must be finite and increasing");
  std::vector<SweepPoint> out(n_points);
  const double step = (delta_max - delta_min) / (n_points - 1);
  parallel_for(out.size(), threads, [&](std::size_t i) {
    SweepPoint& p = out[i];
    p.delta = i + 1 == out.size() ? delta_max : delta_min + step * static_cast<double>(i);
    try {
      p.efficiency =
          emission_efficiency(params, build_scheme(params, p.delta, variant, reference, couplings))
              .value;
    } catch (const Error& e) {
      p.ok = false;
      p.efficiency = std::nan("");
      p.error = e.what();
    }
  });
  return out;
}

EfficiencyMinimum locate_efficiency_minimum(const CqedParams& params, Variant variant,
                                            double delta_min, double delta_max,
                                            const ReferenceData& reference,
                                            CouplingMode couplings) {
  const auto eta = [&](double d) {
    return emission_efficiency(params, build_scheme(params, d, variant, reference, couplings)).value;
  };
  const int n = 801;
  const auto scan = efficiency_sweep(params, variant, delta_min, delta_max, n, reference, couplings);
  std::size_t best = 0;
  for (std::size_t i = 0; i < scan.size(); ++i) {
    if (scan[i].ok && (!scan[best].ok || scan[i].efficiency < scan[best].efficiency)) best = i;
  }
  require(scan[best].ok, ErrorCode::DegenerateDenominator, "no valid point in minimum search");
  double lo = scan[best > 0 ? best - 1 : 0].delta;
  double hi = scan[std::min(best + 1, scan.size() - 1)].delta;
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - ratio * (hi - lo);
  double x2 = lo + ratio * (hi - lo);
  double f1 = eta(x1), f2 = eta(x2);
  while (hi - lo > 1e-9 * std::max(1.0, std::abs(lo))) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - ratio * (hi - lo);
      f1 = eta(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + ratio * (hi - lo);
      f2 = eta(x2);
    }
  }
  EfficiencyMinimum m;
  m.delta = 0.5 * (lo + hi);
  m.efficiency = eta(m.delta);
  if (scan[best].efficiency < m.efficiency) {
    m.delta = scan[best].delta;
    m.efficiency = scan[best].efficiency;
  }
  return m;
}

LargeDetuningLimit large_detuning_limit(const CqedParams& params, const LevelScheme& scheme) {
  validate(params);
  const double gamma = units::angular(params.gamma);
  const double kappa = units::angular(params.kappa());
  const double g = units::angular(params.g);
  const auto& c_g = scheme.coupling_table.c_g;
  const auto& c_s = scheme.coupling_table.c_s;

  // With M = iΔ·1 + G, M⁻¹ = -i/Δ + G/Δ² + O(Δ⁻³), so only Re G survives
  // in Re K at order Δ⁻², and only the -i/Δ term in L.
  double gp[2];
  for (int j = 0; j < 2; ++j) {
    const double gj = c_g[j] * g;
    gp[j] = gamma * (1.0 + 2.0 * gj * gj / (2.0 * kappa * gamma));
  }
  const double b = (c_g[0] * g) * (c_g[1] * g) / kappa;
  LargeDetuningLimit lim;
  lim.re_k_delta2 = 0.25 * (c_s[0] * c_s[0] * gp[0] + c_s[1] * c_s[1] * gp[1] +
                            2.0 * c_s[0] * c_s[1] * b + c_s[2] * c_s[2] * gamma);
  const double overlap = c_g[0] * c_s[0] + c_g[1] * c_s[1];
  lim.abs_l2_delta2 =
      calibration_factor(params) * 0.5 * gamma * params.cooperativity() * overlap * overlap;
  lim.efficiency = params.escape_efficiency() * lim.abs_l2_delta2 / (2.0 * lim.re_k_delta2);
  return lim;
}

}  // namespace photonshape
