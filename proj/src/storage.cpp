#include "photonshape/storage.hpp"

#include <cmath>

#include "photonshape/error.hpp"

namespace photonshape {

SelectivityCurve selectivity_sweep(const ShapeSpec& base, const CqedParams& params,
                                   const LevelScheme& scheme, const PulseOptions& pulse_opts,
                                   const SelectivityOptions& opts) {
  require(opts.n_points >= 3, ErrorCode::InvalidArgument, "selectivity sweep needs at least 3 points");
  const AdiabaticCoeffs coeffs = adiabatic_coeffs(params, scheme);
  const double eta = emission_efficiency(params, scheme).value;

  ShapeSpec accepted_spec = base;
  accepted_spec.phase_jump = PhaseJump{opts.jump_time, opts.control_jump};
  const TemporalMode accepted = make_shape(accepted_spec);
  const ControlPulse pulse = storage_control(accepted, coeffs, pulse_opts);

  SelectivityCurve c;
  c.eta_retrieve = eta;
  c.eta0 = eta * eta;
  c.points.resize(opts.n_points);
  for (std::size_t k = 0; k < opts.n_points; ++k) {
    SelectivityPoint& p = c.points[k];
    p.delta_phi = 2.0 * M_PI * static_cast<double>(k) / static_cast<double>(opts.n_points);
    ShapeSpec in_spec = base;
    in_spec.phase_jump = PhaseJump{opts.jump_time, p.delta_phi};
    const TemporalMode input = make_shape(in_spec);
    p.overlap_model = selection_efficiency(input, accepted, c.eta0);
    const SpinWaveTrajectory s = absorb(pulse, input, coeffs, params);
    p.absorbed = std::norm(s.S.back()) * eta;
  }
  return c;
}

ConversionReport convert_shape(const TemporalMode& input, const TemporalMode& output,
                               const CqedParams& params, const LevelScheme& scheme,
                               const PulseOptions& pulse_opts) {
  const AdiabaticCoeffs coeffs = adiabatic_coeffs(params, scheme);
  ConversionReport r{.storage = storage_control(input, coeffs, pulse_opts),
                     .retrieval = emission_control(output, coeffs, pulse_opts),
                     .output = output};
  r.eta_analytic = emission_efficiency(params, scheme).value;
  r.stored = std::norm(absorb(r.storage, input, coeffs, params).S.back());
  const SpinWaveTrajectory sw = spin_wave(r.retrieval, coeffs, params);
  r.retrieved = sw.emitted_energy();
  r.total = r.stored * r.retrieved;
  r.analytic_product = r.eta_analytic * r.eta_analytic;
  r.relative_deviation = r.total / r.analytic_product - 1.0;
  r.output = TemporalMode::normalized(output.t0(), output.dt(), sw.flux_out);
  return r;
}

}  // namespace photonshape
