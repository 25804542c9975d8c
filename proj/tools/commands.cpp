#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <vector>

namespace cli {

namespace {

using json = nlohmann::ordered_json;
using cplx = std::complex<double>;

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

class Csv {
 public:
  Csv(const std::string& path, const std::string& comment, const std::vector<std::string>& columns)
      : path_(path), out_(path) {
    if (!out_) throw std::runtime_error("cannot open " + path + " for writing");
    if (!comment.empty()) out_ << "# " << comment << '\n';
    for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
    out_ << '\n';
  }
  void row(const std::vector<double>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) out_ << (i ? "," : "") << num(v[i]);
    out_ << '\n';
  }
  ~Csv() noexcept(false) {
    out_.close();
    if (!out_ && std::uncaught_exceptions() == 0) throw std::runtime_error("failed writing " + path_);
  }

 private:
  std::string path_;
  std::ofstream out_;
};

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("failed writing " + path);
}

std::string column_name(ps_variant v) {
  std::string s = std::string("eta_") + variant_name(v);
  for (char& c : s) c = c == '-' ? '_' : c;
  return s;
}

Scheme make_scheme(const ExperimentConfig& cfg, double delta_mhz, ps_variant variant) {
  ps_scheme* s = nullptr;
  check(ps_scheme_create(&cfg.params, delta_mhz, variant, cfg.coupling, cfg.reference_path(), &s), "scheme");
  return Scheme(s);
}

Mode make_mode(const ps_shape_spec& spec) {
  ps_mode* m = nullptr;
  check(ps_mode_from_shape(&spec, &m), "target shape");
  return Mode(m);
}

Pulse make_pulse(const ps_mode* target, const ps_scheme* scheme, ps_direction dir, const ps_pulse_options& po) {
  ps_pulse* p = nullptr;
  check(ps_pulse_synthesize(target, scheme, dir, &po, &p), "pulse synthesis");
  return Pulse(p);
}

struct ModeSamples {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<cplx> v;
};

ModeSamples samples(const ps_mode* mode) {
  ModeSamples s;
  std::size_t n = 0;
  check(ps_mode_grid(mode, &s.t0, &s.dt, &n), "mode grid");
  std::vector<double> re(n), im(n);
  check(ps_mode_samples(mode, re.data(), im.data(), n), "mode samples");
  s.v.resize(n);
  for (std::size_t j = 0; j < n; ++j) s.v[j] = {re[j], im[j]};
  return s;
}

ps_pulse_info pulse_info(const ps_pulse* p) {
  ps_pulse_info info{};
  check(ps_pulse_get_info(p, &info), "pulse info");
  return info;
}

json pulse_json(const ps_pulse_info& i) {
  return {{"direction", i.direction == PS_EMISSION ? "emission" : "storage"},
          {"compensation", i.compensation != 0},
          {"samples", i.n},
          {"t0_us", i.t0_us},
          {"dt_us", i.dt_us},
          {"peak_rabi_mhz", i.peak_rabi_mhz},
          {"omega_max_mhz", i.omega_max_mhz},
          {"tail_epsilon", i.tail_epsilon},
          {"clamped", i.clamped != 0},
          {"clamp_onset_us", i.clamped ? json(i.t0_us + i.dt_us * static_cast<double>(i.clamp_onset)) : json(nullptr)},
          {"clamped_samples", i.clamped_samples},
          {"active_from_us", i.t0_us + i.dt_us * static_cast<double>(i.active_begin)},
          {"active_to_us", i.t0_us + i.dt_us * static_cast<double>(i.active_end)},
          {"pulse_area_rad2_per_us", i.total_h}};
}

json params_json(const ExperimentConfig& cfg) {
  return {{"g_mhz", cfg.params.g_mhz},
          {"kappa_c_mhz", cfg.params.kappa_c_mhz},
          {"kappa_l_mhz", cfg.params.kappa_l_mhz},
          {"gamma_mhz", cfg.params.gamma_mhz},
          {"coupling", cfg.coupling == PS_COUPLING_UNIT ? "unit" : "clebsch-gordan"}};
}

ps_pulse_options pulse_options(const ExperimentConfig& cfg, bool compensate) {
  ps_pulse_options po = cfg.pulse;
  po.compensate_phase = compensate ? 1 : 0;
  return po;
}

// Vertex of the least-squares parabola through (x, y).
double parabola_vertex(const std::vector<double>& x, const std::vector<double>& y) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double s[5] = {0, 0, 0, 0, 0}, r[3] = {0, 0, 0};
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double u = x[i] - mean;
    double p = 1.0;
    for (int k = 0; k < 5; ++k, p *= u) s[k] += p;
    r[0] += y[i];
    r[1] += u * y[i];
    r[2] += u * u * y[i];
  }
  const double a[3][3] = {{s[0], s[1], s[2]}, {s[1], s[2], s[3]}, {s[2], s[3], s[4]}};
  auto det = [](const double m[3][3]) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  };
  const double d = det(a);
  if (std::abs(d) < 1e-300) throw std::runtime_error("spot checks do not determine a parabola");
  double coef[3];
  for (int c = 0; c < 3; ++c) {
    double m[3][3];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m[i][j] = j == c ? r[i] : a[i][j];
    coef[c] = det(m) / d;
  }
  if (!(coef[2] > 0.0)) throw std::runtime_error("spot checks do not bracket a minimum");
  return mean - coef[1] / (2.0 * coef[2]);
}

}  // namespace

void check(ps_status s, const char* what) {
  if (s != PS_OK) throw ApiFailure(s, std::string(what) + ": " + ps_last_error());
}

void cmd_sweep_efficiency(const ExperimentConfig& cfg, RunManifest& m) {
  const SweepConfig& s = cfg.sweep;
  std::vector<double> delta(s.points);
  std::vector<std::vector<double>> eta(s.variants.size(), std::vector<double>(s.points));
  for (std::size_t k = 0; k < s.variants.size(); ++k) {
    check(ps_efficiency_sweep(&cfg.params, s.variants[k], cfg.coupling, cfg.reference_path(), s.from_mhz, s.to_mhz,
                              s.points, cfg.threads, delta.data(), eta[k].data(), nullptr),
          "efficiency sweep");
  }
  {
    std::vector<std::string> cols{"delta_mhz"};
    for (auto v : s.variants) cols.push_back(column_name(v));
    Csv csv(m.output("efficiency_curve.csv"), "photonshape-efficiency-curve units=MHz (delta is delta/2pi)", cols);
    for (std::size_t i = 0; i < s.points; ++i) {
      std::vector<double> row{delta[i]};
      for (const auto& e : eta) row.push_back(e[i]);
      csv.row(row);
    }
  }

  json minima = json::object();
  auto locate = [&](ps_variant v) {
    double d = 0.0, e = 0.0;
    const ps_status st =
        ps_efficiency_minimum(&cfg.params, v, cfg.coupling, cfg.reference_path(), s.min_from_mhz, s.min_to_mhz, &d, &e);
    if (st != PS_OK) return json{{"error", ps_status_name(st)}, {"message", ps_last_error()}};
    return json{{"delta_mhz", d}, {"eta", e}};
  };
  for (auto v : s.variants) minima[variant_name(v)] = locate(v);

  json report;
  report["parameters"] = params_json(cfg);
  report["minimum_window_mhz"] = {s.min_from_mhz, s.min_to_mhz};
  report["minima"] = minima;

  if (!s.lindblad_checks_mhz.empty()) {
    const Mode target = make_mode(cfg.shape.spec);
    std::vector<double> coherent;
    Csv csv(m.output("lindblad_checks.csv"), std::string("photonshape-lindblad-checks variant=") +
                                                 variant_name(s.check_variant) + " units=MHz",
            {"delta_mhz", "eta_analytic", "eta_lindblad", "eta_coherent", "wrong_polarization", "trace_drift"});
    for (double d : s.lindblad_checks_mhz) {
      const Scheme sc = make_scheme(cfg, d, s.check_variant);
      ps_emission* raw = nullptr;
      check(ps_emission_run(sc.get(), target.get(), &cfg.pulse, &cfg.sim, &raw), "lindblad spot check");
      const Emission em(raw);
      ps_emission_summary sum{};
      check(ps_emission_get_summary(em.get(), &sum), "emission summary");
      csv.row({d, sum.analytic_efficiency, sum.efficiency, sum.coherent_efficiency, sum.wrong_polarization,
               sum.max_trace_drift});
      coherent.push_back(sum.coherent_efficiency);
      std::cout << "  spot check " << num(d) << " MHz: analytic " << num(sum.analytic_efficiency) << ", lindblad "
                << num(sum.coherent_efficiency) << '\n';
    }
    json checks{{"variant", variant_name(s.check_variant)}, {"points", s.lindblad_checks_mhz.size()}};
    if (s.lindblad_checks_mhz.size() >= 3) {
      try {
        const double lmin = parabola_vertex(s.lindblad_checks_mhz, coherent);
        const json amin = minima.contains(variant_name(s.check_variant)) ? minima[variant_name(s.check_variant)]
                                                                          : locate(s.check_variant);
        checks["lindblad_minimum_mhz"] = lmin;
        if (amin.contains("delta_mhz")) {
          checks["analytic_minimum_mhz"] = amin["delta_mhz"];
          checks["separation_mhz"] = std::abs(lmin - amin["delta_mhz"].get<double>());
        }
      } catch (const std::runtime_error& e) {
        checks["lindblad_minimum_error"] = e.what();
      }
    }
    report["lindblad_checks"] = checks;
  }
  write_json(m.output("efficiency_minimum.json"), report);
  for (auto v : s.variants) {
    const json& mn = minima[variant_name(v)];
    if (mn.contains("delta_mhz")) {
      std::cout << variant_name(v) << ": minimum " << num(mn["eta"].get<double>()) << " at "
                << num(mn["delta_mhz"].get<double>()) << " MHz\n";
    }
  }
}

void cmd_shape(const ExperimentConfig& cfg, const CommandOptions& opts, RunManifest& m) {
  const Scheme sc = make_scheme(cfg, cfg.delta_mhz, cfg.variant);
  const Mode target = make_mode(cfg.shape.spec);
  const bool compensate = cfg.pulse.compensate_phase != 0 && !opts.no_compensation;
  const Pulse pulse = make_pulse(target.get(), sc.get(), cfg.direction, pulse_options(cfg, compensate));
  const ps_pulse_info info = pulse_info(pulse.get());
  check(ps_pulse_write_csv(pulse.get(), m.output("pulse.csv").c_str()), "write pulse");
  check(ps_mode_write_csv(target.get(), m.output("target_mode.csv").c_str()), "write target");

  const ModeSamples tg = samples(target.get());
  const bool same_grid = tg.v.size() == info.n;
  std::vector<double> s_re(info.n), s_im(info.n), f_re(info.n), f_im(info.n);
  json predicted;
  if (cfg.direction == PS_EMISSION) {
    double emitted = 0.0;
    check(ps_spin_wave(pulse.get(), sc.get(), s_re.data(), s_im.data(), f_re.data(), f_im.data(), info.n, &emitted),
          "spin wave");
    predicted["emitted"] = emitted;
    Csv csv(m.output("predicted.csv"), "photonshape-predicted direction=emission units=us,us^-1/2",
            {"t", "s_re", "s_im", "flux_re", "flux_im", "flux", "target_re", "target_im"});
    for (std::size_t j = 0; j < info.n; ++j) {
      const cplx t = same_grid ? tg.v[j] : cplx(NAN, NAN);
      csv.row({info.t0_us + info.dt_us * static_cast<double>(j), s_re[j], s_im[j], f_re[j], f_im[j],
               f_re[j] * f_re[j] + f_im[j] * f_im[j], t.real(), t.imag()});
    }
  } else {
    double stored = 0.0;
    check(ps_absorb(pulse.get(), target.get(), sc.get(), s_re.data(), s_im.data(), info.n, &stored), "absorb");
    predicted["stored"] = stored;
    Csv csv(m.output("predicted.csv"), "photonshape-predicted direction=storage units=us,us^-1/2",
            {"t", "s_re", "s_im", "input_re", "input_im"});
    for (std::size_t j = 0; j < info.n; ++j) {
      const cplx t = same_grid ? tg.v[j] : cplx(NAN, NAN);
      csv.row({info.t0_us + info.dt_us * static_cast<double>(j), s_re[j], s_im[j], t.real(), t.imag()});
    }
  }

  double eta = 0.0;
  int exceeds = 0;
  check(ps_scheme_efficiency(sc.get(), &eta, &exceeds), "efficiency");
  ps_coeffs co{};
  check(ps_scheme_coeffs(sc.get(), &co), "coefficients");
  json j;
  j["parameters"] = params_json(cfg);
  j["variant"] = variant_name(cfg.variant);
  j["delta_mhz"] = cfg.delta_mhz;
  j["shape"] = {{"family", shape_family_name(cfg.shape.spec.family)},
                {"duration_us", cfg.shape.spec.characteristic_us},
                {"window_us", {cfg.shape.spec.t_min_us, cfg.shape.spec.t_max_us}},
                {"samples", cfg.shape.spec.n_samples}};
  j["eta"] = eta;
  j["chirp_factor"] = co.chirp_factor;
  j["pulse"] = pulse_json(info);
  j["predicted"] = predicted;
  write_json(m.output("shape.json"), j);
  std::cout << "pulse: peak |Omega|/2pi " << num(info.peak_rabi_mhz) << " MHz"
            << (info.clamped ? ", clamped" : "") << (compensate ? "" : ", uncompensated") << '\n';
}

void cmd_emit(const ExperimentConfig& cfg, RunManifest& m) {
  const Scheme sc = make_scheme(cfg, cfg.delta_mhz, cfg.variant);
  const Mode target = make_mode(cfg.shape.spec);
  const Pulse pulse = make_pulse(target.get(), sc.get(), PS_EMISSION, cfg.pulse);
  ps_emission* raw = nullptr;
  check(ps_emission_run(sc.get(), target.get(), &cfg.pulse, &cfg.sim, &raw), "emission");
  const Emission em(raw);
  check(ps_pulse_write_csv(pulse.get(), m.output("pulse.csv").c_str()), "write pulse");
  check(ps_mode_write_csv(target.get(), m.output("target_mode.csv").c_str()), "write target");
  check(ps_emission_write_csv(em.get(), m.output("simulation.csv").c_str()), "write simulation");
  check(ps_emission_write_json(em.get(), m.output("emission_summary.json").c_str()), "write summary");
  ps_mode* cm = nullptr;
  const ps_status st = ps_emission_coherent_mode(em.get(), &cm);
  if (st == PS_OK) {
    const Mode coherent(cm);
    check(ps_mode_write_csv(coherent.get(), m.output("coherent_mode.csv").c_str()), "write coherent mode");
  } else if (st != PS_ERR_INVALID_ARGUMENT) {
    check(st, "coherent mode");
  }
  ps_emission_summary s{};
  check(ps_emission_get_summary(em.get(), &s), "emission summary");
  std::cout << "efficiency " << num(s.efficiency) << " (coherent " << num(s.coherent_efficiency) << ", analytic "
            << num(s.analytic_efficiency) << "), mode fidelity " << num(s.mode_fidelity) << '\n';
}

void cmd_select(const ExperimentConfig& cfg, RunManifest& m) {
  const Scheme sc = make_scheme(cfg, cfg.delta_mhz, cfg.variant);
  ps_shape_spec base = cfg.shape.spec;
  base.has_phase_jump = 0;
  const std::size_t n = cfg.select.points;
  struct Curve {
    std::vector<double> dphi, overlap, absorbed;
    ps_selectivity info{};
  };
  auto sweep = [&](double control_jump) {
    Curve c{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n), {}};
    check(ps_selectivity_sweep(&base, sc.get(), &cfg.pulse, n, cfg.select.jump_time_us, control_jump, c.dphi.data(),
                               c.overlap.data(), c.absorbed.data(), &c.info),
          "selectivity sweep");
    return c;
  };
  const Curve in = sweep(0.0);
  const Curve ctl = sweep(M_PI);
  {
    Csv csv(m.output("selectivity.csv"), "photonshape-selectivity units=rad",
            {"delta_phi", "input_jump_overlap", "input_jump_absorbed", "control_jump_overlap", "control_jump_absorbed"});
    for (std::size_t k = 0; k < n; ++k) {
      csv.row({in.dphi[k], in.overlap[k], in.absorbed[k], ctl.overlap[k], ctl.absorbed[k]});
    }
  }
  auto fit = [&](const std::vector<double>& y) {
    ps_sin2_fit f{};
    check(ps_fit_sin2(in.dphi.data(), y.data(), n, &f), "sin^2 fit");
    return f;
  };
  auto fit_json = [](const ps_sin2_fit& f) {
    return json{{"A", f.A}, {"B", f.B}, {"phi0_rad", f.phi0}, {"B_over_A", f.B / f.A}, {"rms_residual", f.rms_residual}};
  };
  const ps_sin2_fit f_in = fit(in.overlap), f_ctl = fit(ctl.overlap);
  const ps_sin2_fit a_in = fit(in.absorbed), a_ctl = fit(ctl.absorbed);
  double shift = 0.0, shift_abs = 0.0;
  check(ps_fit_shift(&f_in, &f_ctl, &shift), "fit shift");
  check(ps_fit_shift(&a_in, &a_ctl, &shift_abs), "fit shift");

  json j;
  j["form"] = "A*sin^2(delta_phi/2 + phi0) + B";
  j["eta0"] = in.info.eta0;
  j["eta_retrieve"] = in.info.eta_retrieve;
  j["overlap_model"] = {{"input_jump", fit_json(f_in)}, {"control_jump", fit_json(f_ctl)}, {"shift_rad", shift}};
  j["storage_model"] = {{"input_jump", fit_json(a_in)}, {"control_jump", fit_json(a_ctl)}, {"shift_rad", shift_abs}};
  write_json(m.output("selectivity_fit.json"), j);
  std::cout << "overlap fit: phi0 " << num(f_in.phi0) << " rad, B/A " << num(f_in.B / f_in.A)
            << ", control-jump shift " << num(shift) << " rad\n";
}

void cmd_convert(const ExperimentConfig& cfg, RunManifest& m) {
  const Scheme sc = make_scheme(cfg, cfg.delta_mhz, cfg.variant);
  const Mode in = make_mode(cfg.convert.input.spec);
  const Mode out = make_mode(cfg.convert.output.spec);
  ps_conversion r{};
  ps_pulse *sp = nullptr, *rp = nullptr;
  ps_mode* em = nullptr;
  check(ps_convert_shape(in.get(), out.get(), sc.get(), &cfg.pulse, &r, &sp, &rp, &em), "shape conversion");
  const Pulse storage(sp), retrieval(rp);
  const Mode emitted(em);
  check(ps_pulse_write_csv(storage.get(), m.output("storage_pulse.csv").c_str()), "write storage pulse");
  check(ps_pulse_write_csv(retrieval.get(), m.output("retrieval_pulse.csv").c_str()), "write retrieval pulse");
  check(ps_mode_write_csv(emitted.get(), m.output("emitted_mode.csv").c_str()), "write emitted mode");
  double fid = 0.0;
  check(ps_mode_fidelity(emitted.get(), out.get(), &fid), "fidelity");

  const ps_pulse_info si = pulse_info(storage.get()), ri = pulse_info(retrieval.get());
  const double ratio = cfg.convert.output.spec.characteristic_us / cfg.convert.input.spec.characteristic_us;
  json j;
  j["parameters"] = params_json(cfg);
  j["variant"] = variant_name(cfg.variant);
  j["delta_mhz"] = cfg.delta_mhz;
  j["input_duration_us"] = cfg.convert.input.spec.characteristic_us;
  j["output_duration_us"] = cfg.convert.output.spec.characteristic_us;
  j["eta_analytic"] = r.eta_analytic;
  j["stored"] = r.stored;
  j["retrieved"] = r.retrieved;
  j["total"] = r.total;
  j["analytic_product"] = r.analytic_product;
  j["relative_deviation"] = r.relative_deviation;
  j["output_mode_fidelity"] = fid;
  j["stretch"] = {{"duration_ratio", ratio},
                  {"peak_rabi_ratio", si.peak_rabi_mhz / ri.peak_rabi_mhz},
                  {"expected_peak_rabi_ratio", std::sqrt(ratio)}};
  j["storage_pulse"] = pulse_json(si);
  j["retrieval_pulse"] = pulse_json(ri);

  if (cfg.convert.validate) {
    ps_shape_spec spec = cfg.convert.output.spec;
    spec.characteristic_us = cfg.convert.validation_duration_us;
    spec.t_min_us = -5.0 * spec.characteristic_us;
    spec.t_max_us = 5.0 * spec.characteristic_us;
    spec.n_samples = cfg.convert.validation_samples;
    const Mode target = make_mode(spec);
    ps_sim_options so = cfg.sim;
    so.integrator = PS_ADAPTIVE;
    const auto t0 = std::chrono::steady_clock::now();
    ps_emission* raw = nullptr;
    check(ps_emission_run(sc.get(), target.get(), &cfg.pulse, &so, &raw), "retrieval validation");
    const Emission v(raw);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ps_emission_summary s{};
    check(ps_emission_get_summary(v.get(), &s), "emission summary");
    json val{{"output_duration_us", spec.characteristic_us},
             {"integrator", "adaptive"},
             {"eta_analytic", s.analytic_efficiency},
             {"eta_lindblad", s.efficiency},
             {"eta_coherent", s.coherent_efficiency},
             {"relative_deviation", (s.coherent_efficiency - s.analytic_efficiency) / s.analytic_efficiency},
             {"mode_fidelity", s.mode_fidelity},
             {"steps", s.steps}};
    write_json(m.output("validation.json"), val);
    j["validation"] = {{"file", "validation.json"}, {"runtime_s", wall}};
    std::cout << "retrieval validation: analytic " << num(s.analytic_efficiency) << ", lindblad "
              << num(s.coherent_efficiency) << '\n';
  }
  write_json(m.output("conversion.json"), j);
  std::cout << "conversion total " << num(r.total) << " (eta^2 " << num(r.analytic_product) << ")\n";
}

void cmd_homodyne(const ExperimentConfig& cfg, RunManifest& m) {
  const HomodyneConfig& h = cfg.homodyne;
  const Scheme sc = make_scheme(cfg, cfg.delta_mhz, cfg.variant);
  const Mode target = make_mode(cfg.shape.spec);
  ps_coeffs co{};
  check(ps_scheme_coeffs(sc.get(), &co), "coefficients");
  const ps_record_grid grid{h.t_start_us, (h.t_end_us - h.t_start_us) / static_cast<double>(h.bins), h.bins};

  Records vacuum;
  if (h.vacuum_trials > 0) {
    ps_records* raw = nullptr;
    check(ps_records_synthesize(target.get(), 0.0, h.vacuum_trials, &grid, cfg.seed ^ 0x9e3779b97f4a7c15ULL,
                                PS_GENERATOR_GAUSSIAN, cfg.threads, &raw),
          "vacuum records");
    vacuum.reset(raw);
  }

  // Target sampled at the bin centres for the plotted comparison.
  ps_mode* tr = nullptr;
  check(ps_mode_resample(target.get(), grid.t_start_us + 0.5 * grid.bin_width_us, grid.bin_width_us, h.bins, &tr),
        "target resample");
  const Mode target_bins(tr);
  const ModeSamples tb = samples(target_bins.get());

  json report;
  report["parameters"] = params_json(cfg);
  report["variant"] = variant_name(cfg.variant);
  report["delta_mhz"] = cfg.delta_mhz;
  report["chirp_factor"] = co.chirp_factor;
  report["trials"] = h.trials;
  report["bins"] = h.bins;
  report["p1"] = h.p1;
  report["generator"] = h.generator == PS_GENERATOR_GAUSSIAN ? "gaussian" : "fock-mixture";
  report["source"] = h.source;
  report["seed"] = cfg.seed;
  json pipelines = json::object();

  for (const std::string& name : h.pipelines) {
    const bool compensate = name == "compensated";
    const ps_pulse_options po = pulse_options(cfg, compensate);
    Mode injected;
    if (h.source == "lindblad") {
      ps_emission* raw = nullptr;
      check(ps_emission_run(sc.get(), target.get(), &po, &cfg.sim, &raw), "emission");
      const Emission em(raw);
      ps_mode* cm = nullptr;
      check(ps_emission_coherent_mode(em.get(), &cm), "coherent mode");
      injected.reset(cm);
    } else {
      const Pulse pulse = make_pulse(target.get(), sc.get(), PS_EMISSION, po);
      const ps_pulse_info info = pulse_info(pulse.get());
      std::vector<double> f_re(info.n), f_im(info.n);
      check(ps_spin_wave(pulse.get(), sc.get(), nullptr, nullptr, f_re.data(), f_im.data(), info.n, nullptr),
            "spin wave");
      ps_mode* raw = nullptr;
      check(ps_mode_from_samples(info.t0_us, info.dt_us, info.n, f_re.data(), f_im.data(), 1, &raw), "injected mode");
      injected.reset(raw);
    }

    ps_records* rr = nullptr;
    check(ps_records_synthesize(injected.get(), h.p1, h.trials, &grid, cfg.seed, h.generator, cfg.threads, &rr),
          "records");
    const Records records(rr);
    if (h.write_records) check(ps_records_write_csv(records.get(), m.output("records_" + name + ".csv").c_str()), "write records");

    ps_decomposition* dr = nullptr;
    check(ps_decompose(records.get(), vacuum.get(), 0, &dr), "decomposition");
    const Decomposition dec(dr);
    std::vector<double> ev(h.bins);
    check(ps_decomposition_eigenvalues(dec.get(), ev.data(), h.bins), "eigenvalues");

    json p;
    p["eigenvalues"] = std::vector<double>(ev.begin(), ev.begin() + std::min<std::size_t>(5, ev.size()));
    ps_reconstruction_info ri{};
    const ps_status st = ps_reconstruct(dec.get(), h.threshold, &ri);
    p["threshold"] = ri.threshold;
    p["significant"] = ri.significant;
    if (st == PS_ERR_MULTIMODE_SIGNAL) {
      p["multimode"] = true;
      p["has_mode"] = false;
      p["message"] = ps_last_error();
    } else {
      check(st, "reconstruction");
      p["multimode"] = false;
      p["has_mode"] = ri.has_mode != 0;
      p["n1"] = ri.n1;
      p["n2"] = ri.n2;
      check(ps_decomposition_write_json(dec.get(), m.output("decomposition_" + name + ".json").c_str()),
            "write decomposition");
    }

    if (st == PS_OK && ri.has_mode) {
      double fid = 0.0;
      check(ps_reconstruction_fidelity(dec.get(), target.get(), 0.0, &fid), "fidelity");
      p["fidelity"] = fid;
      if (!compensate) {
        double restored = 0.0;
        check(ps_reconstruction_fidelity(dec.get(), target.get(), co.chirp_factor, &restored), "restored fidelity");
        p["restored_fidelity"] = restored;
      }

      // Branch and global phase chosen to best overlap the target, for display.
      std::vector<cplx> f[2];
      std::vector<double> phase[2];
      std::vector<int> defined(h.bins);
      for (int b = 0; b < 2; ++b) {
        std::vector<double> re(h.bins), im(h.bins);
        phase[b].resize(h.bins);
        check(ps_reconstruction_mode(dec.get(), b, re.data(), im.data(), phase[b].data(), defined.data(), h.bins),
              "reconstructed mode");
        for (std::size_t k = 0; k < h.bins; ++k) f[b].emplace_back(re[k], im[k]);
      }
      cplx o[2];
      for (int b = 0; b < 2; ++b) {
        for (std::size_t k = 0; k < h.bins; ++k) o[b] += std::conj(tb.v[k]) * f[b][k];
      }
      const int best = std::norm(o[1]) > std::norm(o[0]) ? 1 : 0;
      const cplx rot = std::abs(o[best]) > 0.0 ? std::conj(o[best]) / std::abs(o[best]) : cplx(1.0);
      Csv csv(m.output("mode_" + name + ".csv"),
              "photonshape-reconstructed-mode pipeline=" + name + " units=us,us^-1/2",
              {"t", "re", "im", "phase", "phase_defined", "target_re", "target_im"});
      for (std::size_t k = 0; k < h.bins; ++k) {
        const cplx v = f[best][k] * rot;
        csv.row({tb.t0 + tb.dt * static_cast<double>(k), v.real(), v.imag(), phase[best][k],
                 static_cast<double>(defined[k]), tb.v[k].real(), tb.v[k].imag()});
      }

      ps_photon_stats ps{}, pt{};
      check(ps_photon_stats_reconstructed(records.get(), dec.get(), &ps), "photon statistics");
      check(ps_photon_stats_for_mode(records.get(), injected.get(), &pt), "photon statistics");
      auto stats_json = [](const ps_photon_stats& s) {
        return json{{"p", {s.p[0], s.p[1], s.p[2]}},
                    {"sigma", {s.sigma[0], s.sigma[1], s.sigma[2]}},
                    {"iterations", s.iterations}};
      };
      p["photon_stats"] = {{"reconstructed_mode", stats_json(ps)}, {"injected_mode", stats_json(pt)}};
      std::cout << name << ": fidelity " << num(fid);
      if (p.contains("restored_fidelity")) std::cout << ", restored " << num(p["restored_fidelity"].get<double>());
      std::cout << ", p1 " << num(pt.p[1]) << '\n';
    } else {
      std::cout << name << ": no mode reconstructed\n";
    }
    pipelines[name] = p;
  }
  report["pipelines"] = pipelines;
  write_json(m.output("homodyne_report.json"), report);
}

void cmd_budget(const ExperimentConfig& cfg, RunManifest& m) {
  std::vector<ps_budget_stage> stages;
  for (const auto& s : cfg.budget) stages.push_back({s.name.c_str(), s.efficiency, s.uncertainty});
  double total = 0.0, unc = 0.0;
  std::vector<double> cumulative(stages.size());
  check(ps_loss_budget(stages.data(), stages.size(), &total, &unc, cumulative.data()), "loss budget");

  {
    std::ofstream out(m.output("budget.csv"));
    out << "stage,efficiency,uncertainty,cumulative\n";
    for (std::size_t i = 0; i < stages.size(); ++i) {
      out << '"' << cfg.budget[i].name << "\"," << num(stages[i].efficiency) << ',' << num(stages[i].uncertainty)
          << ',' << num(cumulative[i]) << '\n';
    }
    if (!out) throw std::runtime_error("failed writing budget.csv");
  }
  json j;
  json rows = json::array();
  for (std::size_t i = 0; i < stages.size(); ++i) {
    rows.push_back({{"stage", cfg.budget[i].name},
                    {"efficiency", stages[i].efficiency},
                    {"uncertainty", stages[i].uncertainty},
                    {"cumulative", cumulative[i]}});
  }
  j["stages"] = rows;
  j["total"] = total;
  j["uncertainty"] = unc;
  if (cfg.brightness) {
    const auto& b = *cfg.brightness;
    const ps_budget_stage p1{"p1", b.p1.efficiency, b.p1.uncertainty};
    const ps_budget_stage det{"detection", b.detection.efficiency, b.detection.uncertainty};
    const ps_budget_stage prep{"preparation", b.preparation.efficiency, b.preparation.uncertainty};
    double v = 0.0, u = 0.0;
    check(ps_source_brightness(&p1, &det, &prep, &v, &u), "source brightness");
    j["brightness"] = {{"value", v}, {"uncertainty", u}};
    std::cout << "brightness " << num(v) << " +- " << num(u) << '\n';
  }
  write_json(m.output("budget.json"), j);
  std::cout << "total efficiency " << num(total) << " +- " << num(unc) << '\n';
}

}  // namespace cli
