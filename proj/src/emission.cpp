#include <algorithm>
#include <cmath>

#include "photonshape/error.hpp"
#include "photonshape/lindblad.hpp"

namespace photonshape {

EmissionReport simulate_pulse(const CqedParams& params, const LevelScheme& scheme,
                              const ControlPulse& pulse, const SimOptions& opts) {
  require(opts.tail >= 0.0, ErrorCode::InvalidArgument, "tail duration must be non-negative");
  const HilbertSpaceSpec space = build_space(scheme);
  const auto n_tail = static_cast<std::size_t>(std::ceil(opts.tail / pulse.dt - 1e-9));
  SimConfig cfg;
  cfg.t_start = pulse.t0;
  cfg.output_dt = pulse.dt;
  cfg.t_end = pulse.t0 + pulse.dt * static_cast<double>(pulse.size() - 1 + n_tail);
  cfg.integrator = opts.integrator;
  cfg.step_bound = opts.step_bound;
  cfg.rtol = opts.rtol;
  cfg.atol = opts.atol;
  cfg.pulse = &pulse;

  EmissionReport r;
  r.sim = evolve(space, cfg, params, scheme);
  try {
    r.analytic_efficiency = emission_efficiency(params, scheme).value;
  } catch (const Error&) {
    r.analytic_efficiency = std::nan("");
  }
  const int sig = r.sim.signal_mode;
  const auto& out = r.sim.out_coupled.back();
  r.efficiency = out[sig];
  r.wrong_polarization = out[1 - sig];
  r.coherent_efficiency = r.sim.coherent_cumulative.back();
  const double total = out[0] + out[1];
  r.incoherent_fraction = total > 0.0 ? (total - r.coherent_efficiency) / total : 0.0;
  r.wrong_polarization_fraction = total > 0.0 ? r.wrong_polarization / total : 0.0;
  if (r.coherent_efficiency > 1e-14) {
    r.coherent_mode =
        TemporalMode::normalized(r.sim.times.front(), pulse.dt, r.sim.coherent_amplitude);
  }
  return r;
}

EmissionReport emission_experiment(const CqedParams& params, const LevelScheme& scheme,
                                   const TemporalMode& target, const PulseOptions& pulse_opts,
                                   const SimOptions& sim_opts) {
  const AdiabaticCoeffs coeffs = adiabatic_coeffs(params, scheme);
  const ControlPulse pulse = emission_control(target, coeffs, pulse_opts);
  EmissionReport r = simulate_pulse(params, scheme, pulse, sim_opts);

  std::vector<cplx> ext(r.sim.times.size(), 0.0);
  std::copy(target.samples().begin(), target.samples().end(), ext.begin());
  r.target = TemporalMode(target.t0(), target.dt(), std::move(ext));
  if (r.coherent_mode) {
    r.mode_fidelity = mode_fidelity(*r.target, *r.coherent_mode);
    const auto& c = *r.coherent_mode;
    const auto& t = *r.target;
    for (std::size_t shift = 0; shift < c.size() / 2; ++shift) {
      cplx o = 0.0;
      for (std::size_t j = shift; j < c.size(); ++j) o += std::conj(t[j - shift]) * c[j];
      const double f = std::norm(o * c.dt());
      if (f > r.aligned_mode_fidelity) {
        r.aligned_mode_fidelity = f;
        r.arrival_delay = static_cast<double>(shift) * c.dt();
      }
    }
  }

  std::vector<cplx> amp(r.sim.times.size()), ref(r.sim.times.size());
  double flux_total = 0.0;
  for (std::size_t j = 0; j < amp.size(); ++j) {
    const double f = std::max(0.0, r.sim.flux_out[j][r.sim.signal_mode]);
    amp[j] = std::sqrt(f);
    ref[j] = std::abs((*r.target)[j]);
    flux_total += f;
  }
  if (flux_total > 0.0) {
    r.intensity_fidelity = mode_fidelity(TemporalMode::normalized(target.t0(), target.dt(), ref),
                                         TemporalMode::normalized(target.t0(), target.dt(), amp));
  }
  return r;
}

}  // namespace photonshape
