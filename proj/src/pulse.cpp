#include "photonshape/pulse.hpp"

#include <algorithm>
#include <cmath>

#include "photonshape/error.hpp"
#include "photonshape/units.hpp"

namespace photonshape {
namespace {

void check_inputs(const TemporalMode& mode, const AdiabaticCoeffs& coeffs,
                  const PulseOptions& opts) {
  require(coeffs.K.real() > 0.0, ErrorCode::InvalidArgument, "control synthesis needs Re K > 0");
  require(std::abs(mode.norm() - 1.0) <= TemporalMode::kNormTolerance, ErrorCode::NotNormalized,
          "target mode is not normalized");
  require(std::isfinite(opts.omega_max) && opts.omega_max > 0.0, ErrorCode::InvalidArgument,
          "omega_max must be positive");
  require(opts.tail_epsilon > 0.0 && opts.tail_epsilon < 1.0, ErrorCode::InvalidArgument,
          "tail_epsilon must lie in (0, 1)");
}

// energy[j] is R_j (emission) or Q_j (storage); sign selects the chirp sign.
ControlPulse synthesize(PulseDirection direction, const TemporalMode& mode,
                        const std::vector<double>& energy, const AdiabaticCoeffs& coeffs,
                        const PulseOptions& opts, double sign) {
  ControlPulse p;
  p.direction = direction;
  p.t0 = mode.t0();
  p.dt = mode.dt();
  p.compensation = opts.compensate_phase;
  p.omega_max = units::angular(opts.omega_max);
  p.tail_epsilon = opts.tail_epsilon;
  const double alpha = opts.compensate_phase ? coeffs.chirp_factor() : 0.0;
  const double two_re_k = 2.0 * coeffs.K.real();
  const std::size_t n = mode.size();
  p.omega.assign(n, 0.0);
  p.active_begin = n;
  p.active_end = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (energy[j] < opts.tail_epsilon) continue;
    p.active_begin = std::min(p.active_begin, j);
    p.active_end = j + 1;
    cplx w = mode[j] / std::sqrt(two_re_k * energy[j]);
    if (alpha != 0.0) w *= std::polar(1.0, sign * alpha * std::log(energy[j]));
    const double mag = std::abs(w);
    if (mag > p.omega_max) {
      w *= p.omega_max / mag;
      if (!p.clamp_first) p.clamp_first = j;
      p.clamp_last = j;
      ++p.clamped_samples;
    }
    p.omega[j] = w;
  }
  if (p.active_end == 0) p.active_begin = 0;
  p.h = accumulate_h(p.omega, p.dt);
  return p;
}

}  // namespace

double ControlPulse::peak_rabi_mhz() const {
  double m = 0.0;
  for (const auto& w : omega) m = std::max(m, std::abs(w));
  return units::linear(m);
}

std::vector<double> accumulate_h(const std::vector<cplx>& omega, double dt) {
  std::vector<double> h(omega.size(), 0.0);
  for (std::size_t j = 1; j < omega.size(); ++j) {
    h[j] = h[j - 1] + 0.5 * (std::norm(omega[j - 1]) + std::norm(omega[j])) * dt;
  }
  return h;
}

ControlPulse pulse_from_samples(PulseDirection direction, double t0, double dt,
                                std::vector<cplx> omega) {
  require(std::isfinite(dt) && dt > 0.0, ErrorCode::InvalidArgument, "grid step must be positive");
  require(omega.size() >= 2, ErrorCode::InvalidArgument, "pulse needs at least two samples");
  ControlPulse p;
  p.direction = direction;
  p.t0 = t0;
  p.dt = dt;
  p.omega = std::move(omega);
  p.h = accumulate_h(p.omega, dt);
  p.active_begin = 0;
  p.active_end = p.omega.size();
  for (const auto& w : p.omega) {
    require(std::isfinite(w.real()) && std::isfinite(w.imag()), ErrorCode::InvalidArgument,
            "pulse samples must be finite");
    p.omega_max = std::max(p.omega_max, std::abs(w));
  }
  return p;
}

ControlPulse emission_control(const TemporalMode& mode, const AdiabaticCoeffs& coeffs,
                              const PulseOptions& opts) {
  check_inputs(mode, coeffs, opts);
  return synthesize(PulseDirection::Emission, mode, mode.remaining_energy(), coeffs, opts, -1.0);
}

ControlPulse storage_control(const TemporalMode& mode, const AdiabaticCoeffs& coeffs,
                             const PulseOptions& opts) {
  check_inputs(mode, coeffs, opts);
  return synthesize(PulseDirection::Storage, mode, mode.cumulative_energy(), coeffs, opts, +1.0);
}

ControlPulse conjugate_time_reverse(const ControlPulse& p) {
  const std::size_t n = p.size();
  ControlPulse r = p;
  r.direction =
      p.direction == PulseDirection::Emission ? PulseDirection::Storage : PulseDirection::Emission;
  r.t0 = -p.time(n - 1);
  for (std::size_t j = 0; j < n; ++j) r.omega[j] = std::conj(p.omega[n - 1 - j]);
  r.h = accumulate_h(r.omega, r.dt);
  const auto mirror = [n](std::optional<std::size_t> i) -> std::optional<std::size_t> {
    if (!i) return std::nullopt;
    return n - 1 - *i;
  };
  r.clamp_first = mirror(p.clamp_last);
  r.clamp_last = mirror(p.clamp_first);
  r.active_begin = n - p.active_end;
  r.active_end = n - p.active_begin;
  return r;
}

std::vector<double> SpinWaveTrajectory::cumulative_flux() const {
  std::vector<double> c(flux_out.size(), 0.0);
  for (std::size_t j = 1; j < flux_out.size(); ++j) {
    c[j] = c[j - 1] + 0.5 * (std::norm(flux_out[j - 1]) + std::norm(flux_out[j])) * dt;
  }
  return c;
}

double SpinWaveTrajectory::emitted_energy() const {
  const auto c = cumulative_flux();
  return c.empty() ? 0.0 : c.back();
}

SpinWaveTrajectory spin_wave(const ControlPulse& pulse, const AdiabaticCoeffs& coeffs,
                             const CqedParams& params) {
  require(pulse.direction == PulseDirection::Emission, ErrorCode::InvalidArgument,
          "spin_wave integrates emission pulses; use absorb for storage");
  const cplx gain = std::sqrt(params.escape_efficiency()) * coeffs.L;
  SpinWaveTrajectory s;
  s.t0 = pulse.t0;
  s.dt = pulse.dt;
  s.S.resize(pulse.size());
  s.flux_out.resize(pulse.size());
  for (std::size_t j = 0; j < pulse.size(); ++j) {
    s.S[j] = std::exp(-coeffs.K * pulse.h[j]);
    s.flux_out[j] = gain * pulse.omega[j] * s.S[j];
  }
  return s;
}

SpinWaveTrajectory absorb(const ControlPulse& pulse, const TemporalMode& input,
                          const AdiabaticCoeffs& coeffs, const CqedParams& params) {
  require(input.size() == pulse.size() && std::abs(input.dt() - pulse.dt) <= 1e-12 * pulse.dt &&
              std::abs(input.t0() - pulse.t0) <= 1e-9 * pulse.dt,
          ErrorCode::GridMismatch, "input photon and control pulse use different grids");
  const cplx gain = std::sqrt(params.escape_efficiency()) * coeffs.L;
  SpinWaveTrajectory s;
  s.t0 = pulse.t0;
  s.dt = pulse.dt;
  s.S.assign(pulse.size(), 0.0);
  cplx prev_src = gain * std::conj(pulse.omega[0]) * input[0];
  for (std::size_t j = 1; j < pulse.size(); ++j) {
    const cplx decay = std::exp(-coeffs.K * (pulse.h[j] - pulse.h[j - 1]));
    const cplx src = gain * std::conj(pulse.omega[j]) * input[j];
    s.S[j] = s.S[j - 1] * decay + 0.5 * pulse.dt * (prev_src * decay + src);
    prev_src = src;
  }
  return s;
}

}  // namespace photonshape
