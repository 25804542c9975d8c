#include "photonshape/photonshape.h"

#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <new>
#include <optional>
#include <string>

#include "photonshape/budget.hpp"
#include "photonshape/cqed.hpp"
#include "photonshape/error.hpp"
#include "photonshape/fitting.hpp"
#include "photonshape/homodyne.hpp"
#include "photonshape/io.hpp"
#include "photonshape/lindblad.hpp"
#include "photonshape/pulse.hpp"
#include "photonshape/storage.hpp"
#include "photonshape/temporal_mode.hpp"

using namespace photonshape;

struct ps_scheme {
  CqedParams params;
  LevelScheme scheme;
};

struct ps_mode {
  TemporalMode mode;
};

struct ps_pulse {
  ControlPulse pulse;
};

struct ps_emission {
  EmissionReport report;
};

struct ps_records {
  QuadratureRecords records;
};

struct ps_decomposition {
  ModeDecomposition dec;
  std::optional<ReconstructedMode> rec;
};

namespace {

thread_local std::string g_last_error;

struct ApiError {
  ps_status status;
  std::string message;
};

ps_status map_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidArgument:
      return PS_ERR_INVALID_ARGUMENT;
    case ErrorCode::Configuration:
      return PS_ERR_CONFIGURATION;
    case ErrorCode::DegenerateDenominator:
      return PS_ERR_DEGENERATE_DENOMINATOR;
    case ErrorCode::NotNormalized:
      return PS_ERR_NOT_NORMALIZED;
    case ErrorCode::WindowTooSmall:
      return PS_ERR_WINDOW_TOO_SMALL;
    case ErrorCode::GridMismatch:
      return PS_ERR_GRID_MISMATCH;
    case ErrorCode::IntegratorFailure:
      return PS_ERR_INTEGRATOR_FAILURE;
    case ErrorCode::MultimodeSignal:
      return PS_ERR_MULTIMODE_SIGNAL;
    case ErrorCode::FitFailure:
      return PS_ERR_FIT_FAILURE;
    case ErrorCode::Io:
      return PS_ERR_IO;
  }
  return PS_ERR_INTERNAL;
}

template <typename F>
ps_status guard(F&& body) {
  try {
    body();
    return PS_OK;
  } catch (const ApiError& e) {
    g_last_error = e.message;
    return e.status;
  } catch (const Error& e) {
    g_last_error = e.what();
    return map_code(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return PS_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return PS_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return PS_ERR_INTERNAL;
  }
}

template <typename... P>
void need(const P*... ptrs) {
  if (((ptrs == nullptr) || ...)) throw ApiError{PS_ERR_NULL_POINTER, "required pointer argument is NULL"};
}

void capacity(size_t have, size_t want) {
  if (have < want) {
    throw ApiError{PS_ERR_BUFFER_TOO_SMALL,
                   "buffer holds " + std::to_string(have) + " entries, " + std::to_string(want) + " required"};
  }
}

template <typename T>
void put(T* dst, T value) {
  if (dst) *dst = value;
}

CqedParams to_params(const ps_params& p) {
  CqedParams c{p.g_mhz, p.kappa_c_mhz, p.kappa_l_mhz, p.gamma_mhz};
  validate(c);
  return c;
}

Variant to_variant(ps_variant v) {
  switch (v) {
    case PS_ONE_LEVEL:
      return Variant::OneLevel;
    case PS_TWO_LEVEL:
      return Variant::TwoLevel;
    case PS_THREE_LEVEL:
      return Variant::ThreeLevel;
  }
  throw ApiError{PS_ERR_INVALID_ARGUMENT, "unknown model variant"};
}

CouplingMode to_coupling(ps_coupling c) {
  switch (c) {
    case PS_COUPLING_CLEBSCH_GORDAN:
      return CouplingMode::ClebschGordan;
    case PS_COUPLING_UNIT:
      return CouplingMode::Unit;
  }
  throw ApiError{PS_ERR_INVALID_ARGUMENT, "unknown coupling mode"};
}

ReferenceData reference(const char* path) {
  return path ? load_reference_data(path) : default_reference_data();
}

ShapeSpec to_shape(const ps_shape_spec& s) {
  ShapeSpec spec;
  switch (s.family) {
    case PS_SHAPE_SECH:
      spec.family = ShapeFamily::Sech;
      break;
    case PS_SHAPE_GAUSSIAN:
      spec.family = ShapeFamily::Gaussian;
      break;
    case PS_SHAPE_SQUARE:
      spec.family = ShapeFamily::Square;
      break;
    default:
      throw ApiError{PS_ERR_INVALID_ARGUMENT, "unknown shape family"};
  }
  spec.characteristic = s.characteristic_us;
  spec.t_min = s.t_min_us;
  spec.t_max = s.t_max_us;
  spec.n_samples = s.n_samples;
  if (s.has_phase_jump) spec.phase_jump = PhaseJump{s.jump_time_us, s.jump_phase_rad};
  return spec;
}

PulseOptions to_pulse_options(const ps_pulse_options* o) {
  PulseOptions p;
  if (o) {
    p.compensate_phase = o->compensate_phase != 0;
    p.omega_max = o->omega_max_mhz;
    p.tail_epsilon = o->tail_epsilon;
  }
  return p;
}

SimOptions to_sim_options(const ps_sim_options* o) {
  SimOptions s;
  if (o) {
    if (o->integrator != PS_RK4 && o->integrator != PS_ADAPTIVE) {
      throw ApiError{PS_ERR_INVALID_ARGUMENT, "unknown integrator"};
    }
    s.integrator = o->integrator == PS_RK4 ? Integrator::RK4 : Integrator::Adaptive;
    s.step_bound = o->step_bound;
    s.tail = o->tail_us;
    s.rtol = o->rtol;
    s.atol = o->atol;
  }
  return s;
}

RecordGrid to_grid(const ps_record_grid& g) {
  RecordGrid r{g.t_start_us, g.bin_width_us, g.n_bins};
  validate(r);
  return r;
}

BudgetStage to_stage(const ps_budget_stage& s) {
  return {s.name ? s.name : "", s.efficiency, s.uncertainty};
}

template <typename T, typename... Args>
T* make(Args&&... args) {
  return new T{std::forward<Args>(args)...};
}

}  // namespace

extern "C" {

const char* ps_version(void) { return PHOTONSHAPE_VERSION; }

const char* ps_status_name(ps_status status) {
  switch (status) {
    case PS_OK:
      return "ok";
    case PS_ERR_INVALID_ARGUMENT:
      return error_code_name(ErrorCode::InvalidArgument);
    case PS_ERR_CONFIGURATION:
      return error_code_name(ErrorCode::Configuration);
    case PS_ERR_DEGENERATE_DENOMINATOR:
      return error_code_name(ErrorCode::DegenerateDenominator);
    case PS_ERR_NOT_NORMALIZED:
      return error_code_name(ErrorCode::NotNormalized);
    case PS_ERR_WINDOW_TOO_SMALL:
      return error_code_name(ErrorCode::WindowTooSmall);
    case PS_ERR_GRID_MISMATCH:
      return error_code_name(ErrorCode::GridMismatch);
    case PS_ERR_INTEGRATOR_FAILURE:
      return error_code_name(ErrorCode::IntegratorFailure);
    case PS_ERR_MULTIMODE_SIGNAL:
      return error_code_name(ErrorCode::MultimodeSignal);
    case PS_ERR_FIT_FAILURE:
      return error_code_name(ErrorCode::FitFailure);
    case PS_ERR_IO:
      return error_code_name(ErrorCode::Io);
    case PS_ERR_NULL_POINTER:
      return "null_pointer";
    case PS_ERR_BUFFER_TOO_SMALL:
      return "buffer_too_small";
    case PS_ERR_INTERNAL:
      return "internal";
  }
  return "unknown";
}

const char* ps_last_error(void) { return g_last_error.c_str(); }

/* ---- cavity QED model ---- */

ps_status ps_scheme_create(const ps_params* params, double delta_mhz, ps_variant variant, ps_coupling coupling,
                           const char* reference_path, ps_scheme** out) {
  return guard([&] {
    need(params, out);
    const CqedParams p = to_params(*params);
    *out = make<ps_scheme>(p, build_scheme(p, delta_mhz, to_variant(variant), reference(reference_path),
                                           to_coupling(coupling)));
  });
}

void ps_scheme_free(ps_scheme* scheme) { delete scheme; }

ps_status ps_scheme_coeffs(const ps_scheme* scheme, ps_coeffs* out) {
  return guard([&] {
    need(scheme, out);
    const AdiabaticCoeffs c = adiabatic_coeffs(scheme->params, scheme->scheme);
    for (int i = 0; i < 3; ++i) {
      out->a_re[i] = c.a[i].real();
      out->a_im[i] = c.a[i].imag();
    }
    out->b = c.b;
    out->K_re = c.K.real();
    out->K_im = c.K.imag();
    out->L_re = c.L.real();
    out->L_im = c.L.imag();
    out->calibration = c.calibration;
    out->chirp_factor = c.chirp_factor();
  });
}

ps_status ps_scheme_efficiency(const ps_scheme* scheme, double* eta, int* exceeds_unity) {
  return guard([&] {
    need(scheme, eta);
    const Efficiency e = emission_efficiency(scheme->params, scheme->scheme);
    *eta = e.value;
    put(exceeds_unity, e.exceeds_unity ? 1 : 0);
  });
}

ps_status ps_scheme_cooperativity(const ps_scheme* scheme, double* cooperativity, double* escape_efficiency) {
  return guard([&] {
    need(scheme);
    put(cooperativity, scheme->params.cooperativity());
    put(escape_efficiency, scheme->params.escape_efficiency());
  });
}

ps_status ps_scheme_large_detuning_limit(const ps_scheme* scheme, double* re_k_delta2, double* abs_l2_delta2,
                                         double* eta_limit) {
  return guard([&] {
    need(scheme);
    const LargeDetuningLimit l = large_detuning_limit(scheme->params, scheme->scheme);
    put(re_k_delta2, l.re_k_delta2);
    put(abs_l2_delta2, l.abs_l2_delta2);
    put(eta_limit, l.efficiency);
  });
}

ps_status ps_efficiency_sweep(const ps_params* params, ps_variant variant, ps_coupling coupling,
                              const char* reference_path, double delta_min_mhz, double delta_max_mhz, size_t n,
                              int threads, double* delta_mhz, double* eta, int* ok) {
  return guard([&] {
    need(params, eta);
    if (n > static_cast<size_t>(std::numeric_limits<int>::max())) {
      throw ApiError{PS_ERR_INVALID_ARGUMENT, "too many sweep points"};
    }
    const auto pts = efficiency_sweep(to_params(*params), to_variant(variant), delta_min_mhz, delta_max_mhz,
                                      static_cast<int>(n), reference(reference_path), to_coupling(coupling),
                                      threads);
    for (size_t i = 0; i < pts.size(); ++i) {
      if (delta_mhz) delta_mhz[i] = pts[i].delta;
      eta[i] = pts[i].ok ? pts[i].efficiency : std::nan("");
      if (ok) ok[i] = pts[i].ok ? 1 : 0;
    }
  });
}

ps_status ps_efficiency_minimum(const ps_params* params, ps_variant variant, ps_coupling coupling,
                                const char* reference_path, double delta_min_mhz, double delta_max_mhz,
                                double* delta_mhz, double* eta) {
  return guard([&] {
    need(params);
    const auto m = locate_efficiency_minimum(to_params(*params), to_variant(variant), delta_min_mhz,
                                             delta_max_mhz, reference(reference_path), to_coupling(coupling));
    put(delta_mhz, m.delta);
    put(eta, m.efficiency);
  });
}

/* ---- temporal modes ---- */

void ps_shape_spec_default(ps_shape_spec* spec) {
  if (!spec) return;
  const ShapeSpec d;
  *spec = ps_shape_spec{PS_SHAPE_SECH, d.characteristic, d.t_min, d.t_max, d.n_samples, 0, 0.0, 0.0};
}

ps_status ps_shape_window_fraction(const ps_shape_spec* spec, double* fraction) {
  return guard([&] {
    need(spec, fraction);
    *fraction = analytic_window_fraction(to_shape(*spec));
  });
}

ps_status ps_mode_from_shape(const ps_shape_spec* spec, ps_mode** out) {
  return guard([&] {
    need(spec, out);
    *out = make<ps_mode>(make_shape(to_shape(*spec)));
  });
}

ps_status ps_mode_from_samples(double t0_us, double dt_us, size_t n, const double* re, const double* im,
                               int normalize, ps_mode** out) {
  return guard([&] {
    need(re, out);
    std::vector<cplx> s(n);
    for (size_t j = 0; j < n; ++j) s[j] = cplx(re[j], im ? im[j] : 0.0);
    *out = make<ps_mode>(normalize ? TemporalMode::normalized(t0_us, dt_us, std::move(s))
                                   : TemporalMode(t0_us, dt_us, std::move(s)));
  });
}

ps_status ps_mode_read_csv(const char* path, ps_mode** out) {
  return guard([&] {
    need(path, out);
    std::ifstream f(path);
    require(static_cast<bool>(f), ErrorCode::Io, std::string("cannot open ") + path);
    *out = make<ps_mode>(io::read_mode_csv(f));
  });
}

ps_status ps_mode_write_csv(const ps_mode* mode, const char* path) {
  return guard([&] {
    need(mode, path);
    std::ofstream f(path);
    require(static_cast<bool>(f), ErrorCode::Io, std::string("cannot open ") + path + " for writing");
    io::write_mode_csv(f, mode->mode);
    require(static_cast<bool>(f), ErrorCode::Io, std::string("failed writing ") + path);
  });
}

void ps_mode_free(ps_mode* mode) { delete mode; }

ps_status ps_mode_grid(const ps_mode* mode, double* t0_us, double* dt_us, size_t* n) {
  return guard([&] {
    need(mode);
    put(t0_us, mode->mode.t0());
    put(dt_us, mode->mode.dt());
    put(n, mode->mode.size());
  });
}

ps_status ps_mode_samples(const ps_mode* mode, double* re, double* im, size_t cap) {
  return guard([&] {
    need(mode);
    capacity(cap, mode->mode.size());
    for (size_t j = 0; j < mode->mode.size(); ++j) {
      if (re) re[j] = mode->mode[j].real();
      if (im) im[j] = mode->mode[j].imag();
    }
  });
}

ps_status ps_mode_fidelity(const ps_mode* a, const ps_mode* b, double* fidelity) {
  return guard([&] {
    need(a, b, fidelity);
    *fidelity = mode_fidelity(a->mode, b->mode);
  });
}

ps_status ps_mode_time_reverse(const ps_mode* mode, ps_mode** out) {
  return guard([&] {
    need(mode, out);
    *out = make<ps_mode>(time_reverse(mode->mode));
  });
}

ps_status ps_mode_resample(const ps_mode* mode, double t0_us, double dt_us, size_t n, ps_mode** out) {
  return guard([&] {
    need(mode, out);
    *out = make<ps_mode>(resample(mode->mode, t0_us, dt_us, n));
  });
}

ps_status ps_mode_apply_log_phase(const ps_mode* mode, const ps_mode* ref, double alpha, ps_mode** out) {
  return guard([&] {
    need(mode, ref, out);
    *out = make<ps_mode>(apply_log_phase(mode->mode, ref->mode, alpha));
  });
}

/* ---- control pulses ---- */

void ps_pulse_options_default(ps_pulse_options* opts) {
  if (!opts) return;
  const PulseOptions d;
  *opts = ps_pulse_options{d.compensate_phase ? 1 : 0, d.omega_max, d.tail_epsilon};
}

ps_status ps_pulse_synthesize(const ps_mode* target, const ps_scheme* scheme, ps_direction direction,
                              const ps_pulse_options* opts, ps_pulse** out) {
  return guard([&] {
    need(target, scheme, out);
    const AdiabaticCoeffs c = adiabatic_coeffs(scheme->params, scheme->scheme);
    const PulseOptions po = to_pulse_options(opts);
    if (direction == PS_EMISSION) {
      *out = make<ps_pulse>(emission_control(target->mode, c, po));
    } else if (direction == PS_STORAGE) {
      *out = make<ps_pulse>(storage_control(target->mode, c, po));
    } else {
      throw ApiError{PS_ERR_INVALID_ARGUMENT, "unknown pulse direction"};
    }
  });
}

ps_status ps_pulse_read_csv(const char* path, ps_pulse** out) {
  return guard([&] {
    need(path, out);
    std::ifstream f(path);
    require(static_cast<bool>(f), ErrorCode::Io, std::string("cannot open ") + path);
    *out = make<ps_pulse>(io::read_pulse_csv(f));
  });
}

ps_status ps_pulse_write_csv(const ps_pulse* pulse, const char* path) {
  return guard([&] {
    need(pulse, path);
    std::ofstream f(path);
    require(static_cast<bool>(f), ErrorCode::Io, std::string("cannot open ") + path + " for writing");
    io::write_pulse_csv(f, pulse->pulse);
    require(static_cast<bool>(f), ErrorCode::Io, std::string("failed writing ") + path);
  });
}

void ps_pulse_free(ps_pulse* pulse) { delete pulse; }

ps_status ps_pulse_get_info(const ps_pulse* pulse, ps_pulse_info* info) {
  return guard([&] {
    need(pulse, info);
    const ControlPulse& p = pulse->pulse;
    const auto onset = p.clamp_onset();
    *info = ps_pulse_info{p.direction == PulseDirection::Emission ? PS_EMISSION : PS_STORAGE,
                          p.t0,
                          p.dt,
                          p.size(),
                          p.compensation ? 1 : 0,
                          p.omega_max / (2.0 * M_PI),
                          p.tail_epsilon,
                          p.peak_rabi_mhz(),
                          onset ? 1 : 0,
                          onset.value_or(0),
                          p.clamped_samples,
                          p.active_begin,
                          p.active_end,
                          p.h.empty() ? 0.0 : p.h.back()};
  });
}

ps_status ps_pulse_samples(const ps_pulse* pulse, double* omega_re, double* omega_im, double* h, size_t cap) {
  return guard([&] {
    need(pulse);
    const ControlPulse& p = pulse->pulse;
    capacity(cap, p.size());
    for (size_t j = 0; j < p.size(); ++j) {
      if (omega_re) omega_re[j] = p.omega[j].real();
      if (omega_im) omega_im[j] = p.omega[j].imag();
      if (h) h[j] = p.h[j];
    }
  });
}

ps_status ps_pulse_conjugate_time_reverse(const ps_pulse* pulse, ps_pulse** out) {
  return guard([&] {
    need(pulse, out);
    *out = make<ps_pulse>(conjugate_time_reverse(pulse->pulse));
  });
}

ps_status ps_spin_wave(const ps_pulse* pulse, const ps_scheme* scheme, double* s_re, double* s_im,
                       double* flux_re, double* flux_im, size_t cap, double* emitted) {
  return guard([&] {
    need(pulse, scheme);
    const SpinWaveTrajectory s =
        spin_wave(pulse->pulse, adiabatic_coeffs(scheme->params, scheme->scheme), scheme->params);
    if (s_re || s_im || flux_re || flux_im) capacity(cap, s.S.size());
    for (size_t j = 0; j < s.S.size(); ++j) {
      if (s_re) s_re[j] = s.S[j].real();
      if (s_im) s_im[j] = s.S[j].imag();
      if (flux_re) flux_re[j] = s.flux_out[j].real();
      if (flux_im) flux_im[j] = s.flux_out[j].imag();
    }
    put(emitted, s.emitted_energy());
  });
}

ps_status ps_absorb(const ps_pulse* pulse, const ps_mode* input, const ps_scheme* scheme, double* s_re,
                    double* s_im, size_t cap, double* stored) {
  return guard([&] {
    need(pulse, input, scheme);
    const SpinWaveTrajectory s =
        absorb(pulse->pulse, input->mode, adiabatic_coeffs(scheme->params, scheme->scheme), scheme->params);
    if (s_re || s_im) capacity(cap, s.S.size());
    for (size_t j = 0; j < s.S.size(); ++j) {
      if (s_re) s_re[j] = s.S[j].real();
      if (s_im) s_im[j] = s.S[j].imag();
    }
    put(stored, std::norm(s.S.back()));
  });
}

/* ---- master-equation simulation ---- */

void ps_sim_options_default(ps_sim_options* opts) {
  if (!opts) return;
  const SimOptions d;
  *opts = ps_sim_options{PS_RK4, d.step_bound, d.tail, d.rtol, d.atol};
}

ps_status ps_emission_run(const ps_scheme* scheme, const ps_mode* target, const ps_pulse_options* pulse_opts,
                          const ps_sim_options* sim_opts, ps_emission** out) {
  return guard([&] {
    need(scheme, target, out);
    *out = make<ps_emission>(emission_experiment(scheme->params, scheme->scheme, target->mode,
                                                 to_pulse_options(pulse_opts), to_sim_options(sim_opts)));
  });
}

ps_status ps_emission_run_pulse(const ps_scheme* scheme, const ps_pulse* pulse, const ps_sim_options* sim_opts,
                                ps_emission** out) {
  return guard([&] {
    need(scheme, pulse, out);
    *out = make<ps_emission>(simulate_pulse(scheme->params, scheme->scheme, pulse->pulse, to_sim_options(sim_opts)));
  });
}

void ps_emission_free(ps_emission* em) { delete em; }

ps_status ps_emission_get_summary(const ps_emission* em, ps_emission_summary* out) {
  return guard([&] {
    need(em, out);
    const EmissionReport& r = em->report;
    *out = ps_emission_summary{};
    out->signal_mode = r.sim.signal_mode;
    out->efficiency = r.efficiency;
    out->wrong_polarization = r.wrong_polarization;
    out->coherent_efficiency = r.coherent_efficiency;
    out->analytic_efficiency = r.analytic_efficiency;
    out->incoherent_fraction = r.incoherent_fraction;
    out->wrong_polarization_fraction = r.wrong_polarization_fraction;
    for (int m = 0; m < 2; ++m) {
      out->out_coupled[m] = r.sim.out_coupled.back()[m];
      out->lost[m] = r.sim.lost.back()[m];
    }
    out->has_target = r.target ? 1 : 0;
    out->mode_fidelity = r.mode_fidelity;
    out->intensity_fidelity = r.intensity_fidelity;
    out->arrival_delay_us = r.arrival_delay;
    out->aligned_mode_fidelity = r.aligned_mode_fidelity;
    out->max_trace_drift = r.sim.max_trace_drift;
    out->steps = r.sim.steps;
    out->step_us = r.sim.step;
    out->n_times = r.sim.times.size();
  });
}

ps_status ps_emission_series(const ps_emission* em, const char* column, double* out, size_t cap) {
  return guard([&] {
    need(em, column, out);
    const SimResult& s = em->report.sim;
    capacity(cap, s.times.size());
    const std::string c = column;
    for (size_t i = 0; i < s.times.size(); ++i) {
      double v;
      if (c == "t") {
        v = s.times[i];
      } else if (c == "trace") {
        v = s.trace[i];
      } else if (c == "flux_sigma_plus" || c == "flux_sigma_minus") {
        v = s.flux_out[i][c == "flux_sigma_plus" ? 0 : 1];
      } else if (c == "out_sigma_plus" || c == "out_sigma_minus") {
        v = s.out_coupled[i][c == "out_sigma_plus" ? 0 : 1];
      } else if (c == "lost_sigma_plus" || c == "lost_sigma_minus") {
        v = s.lost[i][c == "lost_sigma_plus" ? 0 : 1];
      } else if (c == "coherent_re") {
        v = s.coherent_amplitude[i].real();
      } else if (c == "coherent_im") {
        v = s.coherent_amplitude[i].imag();
      } else {
        throw ApiError{PS_ERR_INVALID_ARGUMENT, "unknown series column '" + c + "'"};
      }
      out[i] = v;
    }
  });
}

ps_status ps_emission_coherent_mode(const ps_emission* em, ps_mode** out) {
  return guard([&] {
    need(em, out);
    require(em->report.coherent_mode.has_value(), ErrorCode::InvalidArgument, "no coherent light was emitted");
    *out = make<ps_mode>(*em->report.coherent_mode);
  });
}

ps_status ps_emission_write_csv(const ps_emission* em, const char* path) {
  return guard([&] {
    need(em, path);
    std::ofstream f(path);
    require(static_cast<bool>(f), ErrorCode::Io, std::string("cannot open ") + path + " for writing");
    io::write_sim_csv(f, em->report.sim);
    require(static_cast<bool>(f), ErrorCode::Io, std::string("failed writing ") + path);
  });
}

ps_status ps_emission_write_json(const ps_emission* em, const char* path) {
  return guard([&] {
    need(em, path);
    io::write_text_file(path, io::emission_summary_json(em->report));
  });
}

/* ---- homodyne tomography ---- */

ps_status ps_records_synthesize(const ps_mode* mode, double p1, size_t trials, const ps_record_grid* grid,
                                uint64_t seed, ps_generator generator, int threads, ps_records** out) {
  return guard([&] {
    need(mode, grid, out);
    SynthOptions so;
    if (generator != PS_GENERATOR_GAUSSIAN && generator != PS_GENERATOR_FOCK_MIXTURE) {
      throw ApiError{PS_ERR_INVALID_ARGUMENT, "unknown record generator"};
    }
    so.generator = generator == PS_GENERATOR_GAUSSIAN ? RecordGenerator::Gaussian : RecordGenerator::FockMixture;
    so.threads = threads;
    *out = make<ps_records>(synth_records(mode->mode, p1, trials, to_grid(*grid), seed, so));
  });
}

ps_status ps_records_read_csv(const char* path, ps_records** out) {
  return guard([&] {
    need(path, out);
    std::ifstream f(path);
    require(static_cast<bool>(f), ErrorCode::Io, std::string("cannot open ") + path);
    *out = make<ps_records>(io::read_records_csv(f));
  });
}

ps_status ps_records_write_csv(const ps_records* records, const char* path) {
  return guard([&] {
    need(records, path);
    std::ofstream f(path);
    require(static_cast<bool>(f), ErrorCode::Io, std::string("cannot open ") + path + " for writing");
    io::write_records_csv(f, records->records);
    require(static_cast<bool>(f), ErrorCode::Io, std::string("failed writing ") + path);
  });
}

void ps_records_free(ps_records* records) { delete records; }

ps_status ps_records_info(const ps_records* records, ps_record_grid* grid, size_t* trials) {
  return guard([&] {
    need(records);
    const RecordGrid& g = records->records.grid;
    if (grid) *grid = ps_record_grid{g.t_start, g.bin_width, g.n_bins};
    put(trials, records->records.trials);
  });
}

ps_status ps_decompose(const ps_records* signal, const ps_records* vacuum, int subtract_mean,
                       ps_decomposition** out) {
  return guard([&] {
    need(signal, out);
    const QuadratureRecords& s = signal->records;
    const RealMatrix corr = autocorrelation(s, subtract_mean != 0);
    RealMatrix ref = RealMatrix::identity(s.grid.n_bins);
    if (vacuum) {
      const RecordGrid& g = vacuum->records.grid;
      require(g.n_bins == s.grid.n_bins && g.bin_width == s.grid.bin_width && g.t_start == s.grid.t_start,
              ErrorCode::GridMismatch, "vacuum reference uses a different grid");
      ref = autocorrelation(vacuum->records, subtract_mean != 0);
    }
    *out = make<ps_decomposition>(decompose(corr, ref, s.grid, s.trials), std::nullopt);
  });
}

void ps_decomposition_free(ps_decomposition* dec) { delete dec; }

ps_status ps_decomposition_eigenvalues(const ps_decomposition* dec, double* out, size_t cap) {
  return guard([&] {
    need(dec, out);
    capacity(cap, dec->dec.eigenvalues.size());
    std::copy(dec->dec.eigenvalues.begin(), dec->dec.eigenvalues.end(), out);
  });
}

ps_status ps_reconstruct(ps_decomposition* dec, double threshold, ps_reconstruction_info* info) {
  return guard([&] {
    need(dec);
    dec->rec.reset();
    try {
      dec->rec = reconstruct_mode(dec->dec, threshold);
    } catch (const Error& e) {
      if (info && e.code() == ErrorCode::MultimodeSignal) {
        const double thr = threshold > 0.0 ? threshold
                           : dec->dec.trials > 0 ? significance_threshold(dec->dec.trials, dec->dec.grid.n_bins)
                                                 : 1e-9;
        size_t sig = 0;
        for (double k : dec->dec.eigenvalues) sig += k > 1.0 + thr ? 1 : 0;
        *info = ps_reconstruction_info{0, sig, thr, 0.0, 0.0};
      }
      throw;
    }
    if (info) {
      const ReconstructedMode& r = *dec->rec;
      *info = ps_reconstruction_info{r.has_mode ? 1 : 0, r.significant, r.threshold, r.n1, r.n2};
    }
  });
}

ps_status ps_reconstruction_mode(const ps_decomposition* dec, int conjugate, double* re, double* im,
                                 double* phase, int* phase_defined, size_t cap) {
  return guard([&] {
    need(dec);
    require(dec->rec.has_value(), ErrorCode::InvalidArgument, "call ps_reconstruct first");
    const ReconstructedMode& r = *dec->rec;
    capacity(cap, r.mode.size());
    for (size_t b = 0; b < r.mode.size(); ++b) {
      const cplx v = conjugate ? std::conj(r.mode[b]) : r.mode[b];
      if (re) re[b] = v.real();
      if (im) im[b] = v.imag();
      if (phase) phase[b] = conjugate ? -r.phase[b] : r.phase[b];
      if (phase_defined) phase_defined[b] = r.phase_defined[b] ? 1 : 0;
    }
  });
}

ps_status ps_reconstruction_fidelity(const ps_decomposition* dec, const ps_mode* target, double restore_alpha,
                                     double* fidelity) {
  return guard([&] {
    need(dec, target, fidelity);
    require(dec->rec.has_value(), ErrorCode::InvalidArgument, "call ps_reconstruct first");
    const std::vector<cplx> tb = bin_mode(target->mode, dec->rec->grid);
    *fidelity = restore_alpha != 0.0 ? restored_branch_fidelity(*dec->rec, tb, target->mode, restore_alpha)
                                     : branch_fidelity(*dec->rec, tb);
  });
}

ps_status ps_decomposition_write_json(const ps_decomposition* dec, const char* path) {
  return guard([&] {
    need(dec, path);
    io::write_text_file(path, io::decomposition_json(dec->dec, dec->rec ? &*dec->rec : nullptr));
  });
}

ps_status ps_photon_stats_reconstructed(const ps_records* records, const ps_decomposition* dec,
                                        ps_photon_stats* out) {
  return guard([&] {
    need(records, dec, out);
    require(dec->rec.has_value(), ErrorCode::InvalidArgument, "call ps_reconstruct first");
    const PhotonStats st = photon_stats(records->records, *dec->rec);
    *out = ps_photon_stats{{st.p[0], st.p[1], st.p[2]}, {st.sigma[0], st.sigma[1], st.sigma[2]}, st.iterations,
                           st.log_likelihood};
  });
}

ps_status ps_photon_stats_for_mode(const ps_records* records, const ps_mode* mode, ps_photon_stats* out) {
  return guard([&] {
    need(records, mode, out);
    const PhotonStats st = photon_stats(records->records, bin_mode(mode->mode, records->records.grid));
    *out = ps_photon_stats{{st.p[0], st.p[1], st.p[2]}, {st.sigma[0], st.sigma[1], st.sigma[2]}, st.iterations,
                           st.log_likelihood};
  });
}

/* ---- storage, selectivity, conversion ---- */

ps_status ps_selectivity_sweep(const ps_shape_spec* base, const ps_scheme* scheme, const ps_pulse_options* opts,
                               size_t n_points, double jump_time_us, double control_jump_rad, double* delta_phi,
                               double* overlap_model, double* absorbed, ps_selectivity* info) {
  return guard([&] {
    need(base, scheme);
    SelectivityOptions so;
    so.n_points = n_points;
    so.jump_time = jump_time_us;
    so.control_jump = control_jump_rad;
    const SelectivityCurve c =
        selectivity_sweep(to_shape(*base), scheme->params, scheme->scheme, to_pulse_options(opts), so);
    for (size_t k = 0; k < c.points.size(); ++k) {
      if (delta_phi) delta_phi[k] = c.points[k].delta_phi;
      if (overlap_model) overlap_model[k] = c.points[k].overlap_model;
      if (absorbed) absorbed[k] = c.points[k].absorbed;
    }
    if (info) *info = ps_selectivity{c.eta0, c.eta_retrieve};
  });
}

ps_status ps_fit_sin2(const double* x, const double* y, size_t n, ps_sin2_fit* out) {
  return guard([&] {
    need(x, y, out);
    const Sin2Fit f = fit_sin2(std::vector<double>(x, x + n), std::vector<double>(y, y + n));
    *out = ps_sin2_fit{f.A, f.B, f.phi0, f.rms_residual};
  });
}

ps_status ps_fit_shift(const ps_sin2_fit* a, const ps_sin2_fit* b, double* shift) {
  return guard([&] {
    need(a, b, shift);
    *shift = fitted_shift(Sin2Fit{a->A, a->B, a->phi0, a->rms_residual},
                          Sin2Fit{b->A, b->B, b->phi0, b->rms_residual});
  });
}

ps_status ps_convert_shape(const ps_mode* input, const ps_mode* output, const ps_scheme* scheme,
                           const ps_pulse_options* opts, ps_conversion* out, ps_pulse** storage_pulse,
                           ps_pulse** retrieval_pulse, ps_mode** emitted_mode) {
  return guard([&] {
    need(input, output, scheme, out);
    const ConversionReport r =
        convert_shape(input->mode, output->mode, scheme->params, scheme->scheme, to_pulse_options(opts));
    *out = ps_conversion{r.eta_analytic, r.stored, r.retrieved, r.total, r.analytic_product, r.relative_deviation};
    std::unique_ptr<ps_pulse> sp(storage_pulse ? make<ps_pulse>(r.storage) : nullptr);
    std::unique_ptr<ps_pulse> rp(retrieval_pulse ? make<ps_pulse>(r.retrieval) : nullptr);
    std::unique_ptr<ps_mode> em(emitted_mode ? make<ps_mode>(r.output) : nullptr);
    if (storage_pulse) *storage_pulse = sp.release();
    if (retrieval_pulse) *retrieval_pulse = rp.release();
    if (emitted_mode) *emitted_mode = em.release();
  });
}

/* ---- efficiency budget ---- */

ps_status ps_loss_budget(const ps_budget_stage* stages, size_t n, double* total, double* uncertainty,
                         double* cumulative) {
  return guard([&] {
    if (n > 0) need(stages);
    std::vector<BudgetStage> chain;
    for (size_t i = 0; i < n; ++i) chain.push_back(to_stage(stages[i]));
    const BudgetResult r = loss_budget(chain);
    put(total, r.total);
    put(uncertainty, r.uncertainty);
    if (cumulative) {
      for (size_t i = 0; i < n; ++i) cumulative[i] = r.rows[i].cumulative;
    }
  });
}

ps_status ps_source_brightness(const ps_budget_stage* p1, const ps_budget_stage* detection,
                               const ps_budget_stage* preparation, double* value, double* uncertainty) {
  return guard([&] {
    need(p1, detection, preparation);
    const BrightnessEstimate b = source_brightness(to_stage(*p1), to_stage(*detection), to_stage(*preparation));
    put(value, b.value);
    put(uncertainty, b.uncertainty);
  });
}

}  // extern "C"
