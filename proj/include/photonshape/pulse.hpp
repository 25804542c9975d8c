#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "photonshape/cqed.hpp"
#include "photonshape/temporal_mode.hpp"

namespace photonshape {

enum class PulseDirection { Emission, Storage };

struct PulseOptions {
  bool compensate_phase = true;
  double omega_max = 500.0;   // |Ω|/2π bound, MHz
  double tail_epsilon = 1e-4;  // remaining-energy fraction below which the drive is off
};

// Control field on a uniform grid. omega in rad/µs, h = ∫|Ω|²dt (trapezoid,
// rad²/µs). Invariants: h non-decreasing, |Ω| <= omega_max.
struct ControlPulse {
  PulseDirection direction = PulseDirection::Emission;
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<cplx> omega;
  std::vector<double> h;
  bool compensation = true;
  double omega_max = 0.0;  // rad/µs
  double tail_epsilon = 0.0;
  std::optional<std::size_t> clamp_first;
  std::optional<std::size_t> clamp_last;
  std::size_t clamped_samples = 0;
  // Samples outside [active_begin, active_end) are switched off by the
  // tail rule.
  std::size_t active_begin = 0;
  std::size_t active_end = 0;

  std::size_t size() const { return omega.size(); }
  double time(std::size_t j) const { return t0 + dt * static_cast<double>(j); }
  // Emission: first clamped sample. Storage: last clamped sample of the
  // leading edge (the mirror image of the emission onset).
  std::optional<std::size_t> clamp_onset() const {
    return direction == PulseDirection::Emission ? clamp_first : clamp_last;
  }
  double peak_rabi_mhz() const;
};

std::vector<double> accumulate_h(const std::vector<cplx>& omega, double dt);

// Builds a pulse from raw samples (no clamping applied); omega in rad/µs.
ControlPulse pulse_from_samples(PulseDirection direction, double t0, double dt,
                                std::vector<cplx> omega);

ControlPulse emission_control(const TemporalMode& mode, const AdiabaticCoeffs& coeffs,
                              const PulseOptions& opts);
ControlPulse storage_control(const TemporalMode& mode, const AdiabaticCoeffs& coeffs,
                             const PulseOptions& opts);

// Ω(t) -> Ω*(-t) on the mirrored grid, direction swapped.
ControlPulse conjugate_time_reverse(const ControlPulse& pulse);

// S and out-field amplitude 𝓔_out (µs^-1/2) on the pulse grid. For storage,
// flux_out is left empty (the reflected field is not modelled).
struct SpinWaveTrajectory {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<cplx> S;
  std::vector<cplx> flux_out;

  // Trapezoidal ∫|flux_out|² dt up to each sample.
  std::vector<double> cumulative_flux() const;
  double emitted_energy() const;
};

// Emission: S(t0) = 1, S = exp(-K h), 𝓔_out = √η_esc·L·Ω·S.
SpinWaveTrajectory spin_wave(const ControlPulse& pulse, const AdiabaticCoeffs& coeffs,
                             const CqedParams& params);

// Storage: S(t0) = 0, dS/dt = -K|Ω|²S + √η_esc·L·Ω*·𝓔_in, integrated with
// the exact integrating factor exp(-K h) and trapezoidal quadrature.
SpinWaveTrajectory absorb(const ControlPulse& pulse, const TemporalMode& input,
                          const AdiabaticCoeffs& coeffs, const CqedParams& params);

}  // namespace photonshape
