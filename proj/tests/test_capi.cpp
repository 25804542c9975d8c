#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include "doctest.h"
#include "photonshape/photonshape.h"

namespace {

const ps_params kCavity{4.9, 2.4, 0.3, 3.03};
constexpr double kPi = 3.14159265358979323846;

ps_scheme* make_scheme(double delta, ps_variant v = PS_THREE_LEVEL, ps_coupling c = PS_COUPLING_CLEBSCH_GORDAN) {
  ps_scheme* s = nullptr;
  REQUIRE(ps_scheme_create(&kCavity, delta, v, c, nullptr, &s) == PS_OK);
  return s;
}

ps_shape_spec sech(double T, size_t n = 1000) {
  ps_shape_spec s;
  ps_shape_spec_default(&s);
  s.family = PS_SHAPE_SECH;
  s.characteristic_us = T;
  s.t_min_us = -5.0 * T;
  s.t_max_us = 5.0 * T;
  s.n_samples = n;
  return s;
}

ps_mode* make_mode(const ps_shape_spec& spec) {
  ps_mode* m = nullptr;
  REQUIRE(ps_mode_from_shape(&spec, &m) == PS_OK);
  return m;
}

std::string temp_path(const char* name) {
  const auto dir = std::filesystem::temp_directory_path() / "photonshape_test_capi";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

}  // namespace

TEST_CASE("version and status names") {
  CHECK(std::strlen(ps_version()) > 0);
  CHECK(std::string(ps_status_name(PS_OK)) == "ok");
  CHECK(std::string(ps_status_name(PS_ERR_MULTIMODE_SIGNAL)) == "multimode_signal");
  CHECK(std::string(ps_status_name(static_cast<ps_status>(999))) == "unknown");
}

TEST_CASE("null handles and null outputs") {
  CHECK(ps_scheme_create(nullptr, 0.0, PS_ONE_LEVEL, PS_COUPLING_UNIT, nullptr, nullptr) == PS_ERR_NULL_POINTER);
  CHECK(std::strlen(ps_last_error()) > 0);
  double eta = 0.0;
  CHECK(ps_scheme_efficiency(nullptr, &eta, nullptr) == PS_ERR_NULL_POINTER);
  ps_scheme* s = make_scheme(-20.0);
  CHECK(ps_scheme_efficiency(s, nullptr, nullptr) == PS_ERR_NULL_POINTER);
  ps_scheme_free(s);
  ps_scheme_free(nullptr);
  ps_mode_free(nullptr);
  ps_pulse_free(nullptr);
  ps_emission_free(nullptr);
  ps_records_free(nullptr);
  ps_decomposition_free(nullptr);
}

TEST_CASE("scheme creation errors map to status codes") {
  ps_scheme* s = nullptr;
  const ps_params bad{-1.0, 2.4, 0.3, 3.03};
  CHECK(ps_scheme_create(&bad, 0.0, PS_ONE_LEVEL, PS_COUPLING_UNIT, nullptr, &s) == PS_ERR_INVALID_ARGUMENT);
  CHECK(s == nullptr);
  CHECK(ps_scheme_create(&kCavity, 0.0, PS_ONE_LEVEL, PS_COUPLING_UNIT, "/nonexistent.json", &s) ==
        PS_ERR_CONFIGURATION);
  CHECK(std::string(ps_last_error()).find("reference") != std::string::npos);
  CHECK(ps_scheme_create(&kCavity, 0.0, static_cast<ps_variant>(7), PS_COUPLING_UNIT, nullptr, &s) ==
        PS_ERR_INVALID_ARGUMENT);
}

TEST_CASE("last error is per thread") {
  ps_scheme* s = nullptr;
  CHECK(ps_scheme_create(nullptr, 0.0, PS_ONE_LEVEL, PS_COUPLING_UNIT, nullptr, &s) == PS_ERR_NULL_POINTER);
  const std::string mine = ps_last_error();
  std::thread([] {
    ps_scheme* t = nullptr;
    const ps_params bad{-1.0, 2.4, 0.3, 3.03};
    ps_scheme_create(&bad, 0.0, PS_ONE_LEVEL, PS_COUPLING_UNIT, nullptr, &t);
  }).join();
  CHECK(std::string(ps_last_error()) == mine);
}

TEST_CASE("analytic model through the C API") {
  ps_scheme* unit = make_scheme(0.0, PS_ONE_LEVEL, PS_COUPLING_UNIT);
  double eta = 0.0, C = 0.0, esc = 0.0;
  int over = -1;
  REQUIRE(ps_scheme_efficiency(unit, &eta, &over) == PS_OK);
  REQUIRE(ps_scheme_cooperativity(unit, &C, &esc) == PS_OK);
  CHECK(over == 0);
  CHECK(eta == doctest::Approx(esc * 2.0 * C / (2.0 * C + 1.0)).epsilon(1e-9));
  CHECK(eta == doctest::Approx(0.663).epsilon(0.005 / 0.663));
  ps_coeffs c;
  REQUIRE(ps_scheme_coeffs(unit, &c) == PS_OK);
  CHECK(c.calibration == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(c.K_re > 0.0);
  ps_scheme_free(unit);

  ps_scheme* one = make_scheme(1e5, PS_ONE_LEVEL);
  double rk = 0.0, l2 = 0.0, lim = 0.0;
  REQUIRE(ps_scheme_large_detuning_limit(one, &rk, &l2, &lim) == PS_OK);
  CHECK(lim == doctest::Approx(0.489002534626).epsilon(1e-9));
  ps_scheme_free(one);

  std::vector<double> d(11), e(11);
  std::vector<int> ok(11);
  REQUIRE(ps_efficiency_sweep(&kCavity, PS_TWO_LEVEL, PS_COUPLING_CLEBSCH_GORDAN, nullptr, 0.0, 150.0, 11, 2,
                              d.data(), e.data(), ok.data()) == PS_OK);
  CHECK(d[10] == 150.0);
  for (int k : ok) CHECK(k == 1);
  double dmin = 0.0, emin = 0.0;
  REQUIRE(ps_efficiency_minimum(&kCavity, PS_TWO_LEVEL, PS_COUPLING_CLEBSCH_GORDAN, nullptr, 1.0, 155.0, &dmin,
                                &emin) == PS_OK);
  CHECK(dmin > 0.0);
  CHECK(dmin < 156.947);
  CHECK(emin < 0.01);
  for (double v : e) CHECK(emin <= v + 1e-12);
}

TEST_CASE("modes through the C API") {
  ps_shape_spec narrow = sech(0.5);
  narrow.t_min_us = -0.4;
  narrow.t_max_us = 0.4;
  ps_mode* m = nullptr;
  CHECK(ps_mode_from_shape(&narrow, &m) == PS_ERR_WINDOW_TOO_SMALL);
  double frac = 0.0;
  REQUIRE(ps_shape_window_fraction(&narrow, &frac) == PS_OK);
  CHECK(frac < 0.999);

  std::vector<double> re(16, 1.0);
  CHECK(ps_mode_from_samples(0.0, 0.1, 16, re.data(), nullptr, 0, &m) == PS_ERR_NOT_NORMALIZED);
  REQUIRE(ps_mode_from_samples(0.0, 0.1, 16, re.data(), nullptr, 1, &m) == PS_OK);
  double t0 = -1.0, dt = 0.0;
  size_t n = 0;
  REQUIRE(ps_mode_grid(m, &t0, &dt, &n) == PS_OK);
  CHECK(n == 16);
  std::vector<double> r(15), i(15);
  CHECK(ps_mode_samples(m, r.data(), i.data(), 15) == PS_ERR_BUFFER_TOO_SMALL);
  r.resize(16);
  i.resize(16);
  REQUIRE(ps_mode_samples(m, r.data(), i.data(), 16) == PS_OK);
  CHECK(r[0] == doctest::Approx(1.0 / std::sqrt(1.6)));

  ps_mode* s = make_mode(sech(0.5));
  double f = 0.0;
  CHECK(ps_mode_fidelity(m, s, &f) == PS_ERR_GRID_MISMATCH);
  REQUIRE(ps_mode_fidelity(s, s, &f) == PS_OK);
  CHECK(f == doctest::Approx(1.0).epsilon(1e-12));
  ps_mode* rev = nullptr;
  REQUIRE(ps_mode_time_reverse(s, &rev) == PS_OK);
  REQUIRE(ps_mode_fidelity(s, rev, &f) == PS_OK);
  CHECK(f == doctest::Approx(1.0).epsilon(1e-12));

  const std::string path = temp_path("mode.csv");
  REQUIRE(ps_mode_write_csv(s, path.c_str()) == PS_OK);
  ps_mode* back = nullptr;
  REQUIRE(ps_mode_read_csv(path.c_str(), &back) == PS_OK);
  REQUIRE(ps_mode_fidelity(s, back, &f) == PS_OK);
  CHECK(f == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(ps_mode_read_csv("/nonexistent/mode.csv", &back) == PS_ERR_IO);
  ps_mode_free(back);
  ps_mode_free(rev);
  ps_mode_free(s);
  ps_mode_free(m);
}

TEST_CASE("pulses and analytic emission through the C API") {
  ps_scheme* sc = make_scheme(-20.0);
  ps_mode* m = make_mode(sech(0.5));
  ps_pulse_options po;
  ps_pulse_options_default(&po);
  CHECK(po.compensate_phase == 1);
  CHECK(po.omega_max_mhz == 500.0);
  ps_pulse* p = nullptr;
  REQUIRE(ps_pulse_synthesize(m, sc, PS_EMISSION, &po, &p) == PS_OK);
  ps_pulse_info info;
  REQUIRE(ps_pulse_get_info(p, &info) == PS_OK);
  CHECK(info.direction == PS_EMISSION);
  CHECK(info.n == 1000);
  CHECK(info.peak_rabi_mhz <= 500.0 + 1e-9);
  std::vector<double> sr(info.n), si(info.n), fr(info.n), fi(info.n);
  double emitted = 0.0, eta = 0.0;
  REQUIRE(ps_spin_wave(p, sc, sr.data(), si.data(), fr.data(), fi.data(), info.n, &emitted) == PS_OK);
  REQUIRE(ps_scheme_efficiency(sc, &eta, nullptr) == PS_OK);
  CHECK(emitted == doctest::Approx(eta).epsilon(0.01));
  CHECK(sr[0] == 1.0);
  CHECK(ps_spin_wave(p, sc, sr.data(), nullptr, nullptr, nullptr, info.n - 1, nullptr) == PS_ERR_BUFFER_TOO_SMALL);

  ps_pulse* st = nullptr;
  REQUIRE(ps_pulse_synthesize(m, sc, PS_STORAGE, &po, &st) == PS_OK);
  double stored = 0.0;
  REQUIRE(ps_absorb(st, m, sc, nullptr, nullptr, 0, &stored) == PS_OK);
  CHECK(stored == doctest::Approx(eta).epsilon(0.01));
  ps_mode* coarse = make_mode(sech(0.5, 500));
  CHECK(ps_absorb(p, coarse, sc, nullptr, nullptr, 0, &stored) == PS_ERR_GRID_MISMATCH);
  ps_mode_free(coarse);

  const std::string path = temp_path("pulse.csv");
  REQUIRE(ps_pulse_write_csv(p, path.c_str()) == PS_OK);
  ps_pulse* back = nullptr;
  REQUIRE(ps_pulse_read_csv(path.c_str(), &back) == PS_OK);
  std::vector<double> a(info.n), b(info.n), ha(info.n), hb(info.n), z(info.n), zz(info.n);
  REQUIRE(ps_pulse_samples(p, a.data(), z.data(), ha.data(), info.n) == PS_OK);
  REQUIRE(ps_pulse_samples(back, b.data(), zz.data(), hb.data(), info.n) == PS_OK);
  CHECK(a == b);
  CHECK(z == zz);
  CHECK(ha == hb);
  ps_pulse* mirrored = nullptr;
  REQUIRE(ps_pulse_conjugate_time_reverse(p, &mirrored) == PS_OK);
  ps_pulse_info mi;
  REQUIRE(ps_pulse_get_info(mirrored, &mi) == PS_OK);
  CHECK(mi.direction == PS_STORAGE);
  ps_pulse_free(mirrored);
  ps_pulse_free(back);
  ps_pulse_free(st);
  ps_pulse_free(p);
  ps_mode_free(m);
  ps_scheme_free(sc);
}

TEST_CASE("master-equation emission through the C API") {
  ps_scheme* sc = make_scheme(-20.0);
  ps_shape_spec spec = sech(0.5, 1000);
  ps_mode* m = make_mode(spec);
  ps_pulse_options po;
  ps_pulse_options_default(&po);
  ps_sim_options so;
  ps_sim_options_default(&so);
  ps_emission* em = nullptr;
  REQUIRE(ps_emission_run(sc, m, &po, &so, &em) == PS_OK);
  ps_emission_summary sum;
  REQUIRE(ps_emission_get_summary(em, &sum) == PS_OK);
  CHECK(sum.signal_mode == 1);
  CHECK(sum.has_target == 1);
  CHECK(sum.coherent_efficiency == doctest::Approx(sum.analytic_efficiency).epsilon(0.05));
  CHECK(sum.mode_fidelity >= 0.98);
  CHECK(sum.max_trace_drift < 1e-6);
  std::vector<double> t(sum.n_times), tr(sum.n_times);
  REQUIRE(ps_emission_series(em, "t", t.data(), t.size()) == PS_OK);
  REQUIRE(ps_emission_series(em, "trace", tr.data(), tr.size()) == PS_OK);
  CHECK(ps_emission_series(em, "no_such_column", tr.data(), tr.size()) == PS_ERR_INVALID_ARGUMENT);
  CHECK(ps_emission_series(em, "t", t.data(), 3) == PS_ERR_BUFFER_TOO_SMALL);
  ps_mode* cm = nullptr;
  REQUIRE(ps_emission_coherent_mode(em, &cm) == PS_OK);
  const std::string csv = temp_path("sim.csv"), js = temp_path("sim.json");
  CHECK(ps_emission_write_csv(em, csv.c_str()) == PS_OK);
  CHECK(ps_emission_write_json(em, js.c_str()) == PS_OK);
  CHECK(std::filesystem::file_size(csv) > 0);
  ps_mode_free(cm);
  ps_emission_free(em);
  ps_mode_free(m);
  ps_scheme_free(sc);
}

TEST_CASE("homodyne pipeline through the C API") {
  ps_mode* m = make_mode(sech(0.5, 2000));
  ps_mode* chirped = nullptr;
  REQUIRE(ps_mode_apply_log_phase(m, m, 0.9, &chirped) == PS_OK);
  const ps_record_grid g{-1.25, 0.125, 20};
  ps_records* r = nullptr;
  REQUIRE(ps_records_synthesize(chirped, 0.284, 20000, &g, 5, PS_GENERATOR_GAUSSIAN, 1, &r) == PS_OK);
  ps_record_grid gg;
  size_t trials = 0;
  REQUIRE(ps_records_info(r, &gg, &trials) == PS_OK);
  CHECK(trials == 20000);
  CHECK(gg.n_bins == 20);
  ps_decomposition* d = nullptr;
  REQUIRE(ps_decompose(r, nullptr, 0, &d) == PS_OK);
  std::vector<double> ev(20);
  REQUIRE(ps_decomposition_eigenvalues(d, ev.data(), ev.size()) == PS_OK);
  CHECK(ev[0] >= ev[1]);
  ps_reconstruction_info info;
  REQUIRE(ps_reconstruct(d, 0.0, &info) == PS_OK);
  CHECK(info.has_mode == 1);
  CHECK(info.significant == 2);
  double fid = 0.0;
  REQUIRE(ps_reconstruction_fidelity(d, chirped, 0.0, &fid) == PS_OK);
  CHECK(fid >= 0.95);
  REQUIRE(ps_reconstruction_fidelity(d, m, -0.9, &fid) == PS_OK);
  CHECK(fid >= 0.95);
  std::vector<double> re(20), im(20), ph(20);
  std::vector<int> def(20);
  REQUIRE(ps_reconstruction_mode(d, 0, re.data(), im.data(), ph.data(), def.data(), 20) == PS_OK);
  double norm = 0.0;
  for (int b = 0; b < 20; ++b) norm += (re[b] * re[b] + im[b] * im[b]) * g.bin_width_us;
  CHECK(norm == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(ps_decomposition_write_json(d, temp_path("dec.json").c_str()) == PS_OK);

  ps_records* mix = nullptr;
  REQUIRE(ps_records_synthesize(chirped, 0.284, 50000, &g, 6, PS_GENERATOR_FOCK_MIXTURE, 1, &mix) == PS_OK);
  ps_photon_stats ps;
  REQUIRE(ps_photon_stats_for_mode(mix, chirped, &ps) == PS_OK);
  CHECK(ps.p[1] == doctest::Approx(0.284).epsilon(0.03 / 0.284));

  const std::string path = temp_path("records.csv");
  REQUIRE(ps_records_write_csv(r, path.c_str()) == PS_OK);
  ps_records* back = nullptr;
  REQUIRE(ps_records_read_csv(path.c_str(), &back) == PS_OK);
  ps_decomposition* d2 = nullptr;
  REQUIRE(ps_decompose(back, nullptr, 0, &d2) == PS_OK);
  std::vector<double> ev2(20);
  REQUIRE(ps_decomposition_eigenvalues(d2, ev2.data(), ev2.size()) == PS_OK);
  CHECK(ev == ev2);

  ps_decomposition* unreconstructed = nullptr;
  REQUIRE(ps_decompose(r, nullptr, 0, &unreconstructed) == PS_OK);
  CHECK(ps_photon_stats_reconstructed(r, unreconstructed, &ps) != PS_OK);

  ps_decomposition_free(unreconstructed);
  ps_decomposition_free(d2);
  ps_records_free(back);
  ps_records_free(mix);
  ps_decomposition_free(d);
  ps_records_free(r);
  ps_mode_free(chirped);
  ps_mode_free(m);
}

TEST_CASE("selectivity, fitting and conversion through the C API") {
  ps_scheme* sc = make_scheme(-20.0);
  ps_pulse_options po;
  ps_pulse_options_default(&po);
  const ps_shape_spec base = sech(0.5, 1000);
  std::vector<double> x(72), ov(72), ab(72);
  ps_selectivity info;
  REQUIRE(ps_selectivity_sweep(&base, sc, &po, 72, 0.0, 0.0, x.data(), ov.data(), ab.data(), &info) == PS_OK);
  CHECK(std::abs(ov[36]) < 1e-12);
  ps_sin2_fit a, b;
  REQUIRE(ps_fit_sin2(x.data(), ov.data(), 72, &a) == PS_OK);
  REQUIRE(ps_selectivity_sweep(&base, sc, &po, 72, 0.0, kPi, x.data(), ov.data(), nullptr, nullptr) == PS_OK);
  REQUIRE(ps_fit_sin2(x.data(), ov.data(), 72, &b) == PS_OK);
  double shift = 0.0;
  REQUIRE(ps_fit_shift(&a, &b, &shift) == PS_OK);
  CHECK(shift == doctest::Approx(kPi).epsilon(0.05 / kPi));
  CHECK(ps_fit_sin2(x.data(), ov.data(), 2, &a) == PS_ERR_FIT_FAILURE);

  ps_scheme* unit = make_scheme(0.0, PS_ONE_LEVEL, PS_COUPLING_UNIT);
  ps_mode* in = make_mode(sech(0.5));
  ps_mode* out = make_mode(sech(5.0));
  ps_conversion conv;
  ps_pulse *sp = nullptr, *rp = nullptr;
  ps_mode* em = nullptr;
  REQUIRE(ps_convert_shape(in, out, unit, &po, &conv, &sp, &rp, &em) == PS_OK);
  CHECK(std::abs(conv.relative_deviation) < 0.02);
  CHECK(conv.total == doctest::Approx(0.43).epsilon(0.02 / 0.43));
  double f = 0.0;
  REQUIRE(ps_mode_fidelity(em, out, &f) == PS_OK);
  CHECK(f > 0.999);
  REQUIRE(ps_convert_shape(in, out, unit, &po, &conv, nullptr, nullptr, nullptr) == PS_OK);
  ps_mode_free(em);
  ps_pulse_free(rp);
  ps_pulse_free(sp);
  ps_mode_free(out);
  ps_mode_free(in);
  ps_scheme_free(unit);
  ps_scheme_free(sc);
}

TEST_CASE("budget through the C API") {
  const ps_budget_stage chain[] = {{"atom preparation", 0.74, 0.05}, {"photon production", 0.66, 0.0},
                                   {"cavity-fibre coupling", 0.90, 0.01}, {"fibre transmission", 0.970, 0.005},
                                   {"optics transmission", 0.88, 0.01}, {"mode matching", 0.89, 0.05},
                                   {"photodiode quantum efficiency", 0.98, 0.0}, {"electronic noise", 0.90, 0.01}};
  double total = 0.0, unc = 0.0;
  double cum[8];
  REQUIRE(ps_loss_budget(chain, 8, &total, &unc, cum) == PS_OK);
  CHECK(total == doctest::Approx(0.295).epsilon(0.010 / 0.295));
  CHECK(cum[7] == total);
  REQUIRE(ps_loss_budget(nullptr, 0, &total, &unc, nullptr) == PS_OK);
  CHECK(total == 1.0);
  const ps_budget_stage bad{"bad", 1.5, 0.0};
  CHECK(ps_loss_budget(&bad, 1, &total, &unc, nullptr) == PS_ERR_INVALID_ARGUMENT);
  const ps_budget_stage p1{"p1", 0.284, 0.0}, det{"detection", 0.6, 0.0}, prep{"preparation", 0.74, 0.0};
  double v = 0.0;
  REQUIRE(ps_source_brightness(&p1, &det, &prep, &v, &unc) == PS_OK);
  CHECK(v == doctest::Approx(0.64).epsilon(0.01 / 0.64));
}
