#pragma once

#include <array>
#include <complex>
#include <string>
#include <vector>

#include "photonshape/reference_data.hpp"

namespace photonshape {

using cplx = std::complex<double>;

// Rates in MHz (linear frequency); the 2π factor is applied inside formulas.
struct CqedParams {
  double g = 0.0;
  double kappa_c = 0.0;
  double kappa_l = 0.0;
  double gamma = 0.0;

  double kappa() const { return kappa_c + kappa_l; }
  double cooperativity() const { return g * g / (2.0 * kappa() * gamma); }
  double escape_efficiency() const { return kappa_c / kappa(); }
};

// Throws InvalidArgument unless all four rates are finite and positive.
void validate(const CqedParams& params);

enum class Variant { OneLevel, TwoLevel, ThreeLevel };
enum class CouplingMode { ClebschGordan, Unit };

const char* variant_name(Variant v);
const char* coupling_mode_name(CouplingMode m);
Variant parse_variant(const std::string& name);
CouplingMode parse_coupling_mode(const std::string& name);
int active_manifolds(Variant v);

// One term of the spontaneous-decay table: |F', m'> -> |F, m> emitting
// polarization q = m - m'.
struct DecayChannel {
  int excited_F;
  int excited_m;
  int ground_F;
  int ground_m;
  int q;
  double coefficient;
};

struct CouplingTable {
  std::array<double, 2> c_g{};  // cavity transition, F' = first two excited manifolds
  std::array<double, 3> c_s{};  // control transition, F' = all three excited manifolds
  std::vector<DecayChannel> full_decay_table;
};

struct LevelScheme {
  Variant variant = Variant::ThreeLevel;
  CouplingMode couplings = CouplingMode::ClebschGordan;
  double delta = 0.0;                         // MHz, relative to the lowest excited manifold
  std::array<double, 3> hyperfine_offsets{};  // MHz, first entry 0
  CouplingTable coupling_table;
  ReferenceData reference;

  // Δ_j = Δ - offset_j (MHz).
  std::array<double, 3> detunings() const;
};

LevelScheme build_scheme(const CqedParams& params, double delta_mhz, Variant variant,
                         const ReferenceData& reference,
                         CouplingMode couplings = CouplingMode::ClebschGordan);

// Adiabatic-elimination quantities. a and b in rad/µs, K in µs, L in √µs.
// L already includes √calibration.
struct AdiabaticCoeffs {
  std::array<cplx, 3> a{};
  double b = 0.0;
  cplx K;
  cplx L;
  double calibration = 1.0;

  // Im K / (2 Re K): coefficient of ln R(t) in the control phase.
  double chirp_factor() const { return K.imag() / (2.0 * K.real()); }
};

// Ratio that maps the closed-form |L|²/(2ReK) onto 2C/(2C+1) in the
// single-level, resonant, unit-coupling limit.
double calibration_factor(const CqedParams& params);

AdiabaticCoeffs adiabatic_coeffs(const CqedParams& params, const LevelScheme& scheme);

struct Efficiency {
  double value = 0.0;
  bool exceeds_unity = false;
};

Efficiency emission_efficiency(const CqedParams& params, const LevelScheme& scheme);
Efficiency emission_efficiency(const CqedParams& params, const AdiabaticCoeffs& coeffs);

struct SweepPoint {
  double delta = 0.0;  // MHz
  double efficiency = 0.0;
  bool ok = true;
  std::string error;
};

std::vector<SweepPoint> efficiency_sweep(const CqedParams& params, Variant variant,
                                         double delta_min, double delta_max, int n_points,
                                         const ReferenceData& reference,
                                         CouplingMode couplings = CouplingMode::ClebschGordan,
                                         int threads = 1);

struct EfficiencyMinimum {
  double delta = 0.0;  // MHz
  double efficiency = 0.0;
};

// Global minimum of η(Δ) on [delta_min, delta_max]: coarse scan plus
// golden-section refinement.
EfficiencyMinimum locate_efficiency_minimum(const CqedParams& params, Variant variant,
                                            double delta_min, double delta_max,
                                            const ReferenceData& reference,
                                            CouplingMode couplings = CouplingMode::ClebschGordan);

// Leading large-|Δ| behaviour: Re K·Δ² and |L|²·Δ² (Δ angular) and the
// resulting finite efficiency limit.
struct LargeDetuningLimit {
  double re_k_delta2 = 0.0;
  double abs_l2_delta2 = 0.0;
  double efficiency = 0.0;
};

LargeDetuningLimit large_detuning_limit(const CqedParams& params, const LevelScheme& scheme);

}  // namespace photonshape
