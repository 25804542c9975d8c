// Acceptance run: one PASS/FAIL line per criterion at its stated tolerance.
//
// Exit status is 0 when every criterion passes or fails only where listed
// with --known-failure. A listed criterion that passes is reported and makes
// the run fail, so the list cannot go stale silently.

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "photonshape/budget.hpp"
#include "photonshape/cqed.hpp"
#include "photonshape/fitting.hpp"
#include "photonshape/homodyne.hpp"
#include "photonshape/lindblad.hpp"
#include "photonshape/pulse.hpp"
#include "photonshape/storage.hpp"
#include "photonshape/temporal_mode.hpp"
#include "photonshape/units.hpp"

using namespace photonshape;

namespace {

const CqedParams kCavity{4.9, 2.4, 0.3, 3.03};
const RecordGrid kGrid{-1.25, 0.125, 20};
constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* title;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

LevelScheme scheme(double delta, Variant v = Variant::ThreeLevel, CouplingMode c = CouplingMode::ClebschGordan) {
  return build_scheme(kCavity, delta, v, default_reference_data(), c);
}

ShapeSpec sech(double T, std::size_t n) {
  ShapeSpec s;
  s.characteristic = T;
  s.t_min = -5.0 * T;
  s.t_max = 5.0 * T;
  s.n_samples = n;
  return s;
}

double mod_pi_distance(double a, double b) { return std::abs(std::remainder(a - b, kPi)); }

// Photon mode emitted by the analytic model for the pulse that targets `target`.
TemporalMode analytic_photon(const TemporalMode& target, const LevelScheme& s, bool compensate) {
  PulseOptions po;
  po.compensate_phase = compensate;
  const ControlPulse p = emission_control(target, adiabatic_coeffs(kCavity, s), po);
  const SpinWaveTrajectory w = spin_wave(p, adiabatic_coeffs(kCavity, s), kCavity);
  return TemporalMode::normalized(w.t0, w.dt, w.flux_out);
}

ReconstructedMode reconstruct(const QuadratureRecords& r) {
  return reconstruct_mode(decompose(autocorrelation(r), RealMatrix::identity(r.grid.n_bins), r.grid, r.trials));
}

double total_population(const SimResult& r, std::size_t k) {
  double s = r.photon_number[k][0] + r.photon_number[k][1];
  for (double p : r.atomic_populations[k]) s += p;
  for (int m = 0; m < 2; ++m) s += r.out_coupled[k][m] + r.lost[k][m];
  return s;
}

// ---- criteria ----

Outcome ideal_efficiency() {
  const double C = kCavity.cooperativity();
  const double eta = kCavity.escape_efficiency() * 2.0 * C / (2.0 * C + 1.0);
  const double model = emission_efficiency(kCavity, scheme(0.0, Variant::OneLevel, CouplingMode::Unit)).value;
  return {std::abs(eta - 0.663) <= 0.005 && std::abs(model - eta) <= 1e-9,
          fmt("eta_esc*2C/(2C+1) = %.4f (model %.4f), target 0.663 +- 0.005", eta, model)};
}

Outcome loss_budget_chain() {
  const BudgetResult r = loss_budget({{"atom preparation", 0.74, 0.05},
                                      {"photon production", 0.66, 0.0},
                                      {"cavity-fibre coupling", 0.90, 0.01},
                                      {"fibre transmission", 0.970, 0.005},
                                      {"optics transmission", 0.88, 0.01},
                                      {"mode matching", 0.89, 0.05},
                                      {"photodiode quantum efficiency", 0.98, 0.0},
                                      {"electronic noise", 0.90, 0.01}});
  return {std::abs(r.total - 0.295) <= 0.010,
          fmt("product %.4f +- %.4f, target 0.295 +- 0.010", r.total, r.uncertainty)};
}

Outcome brightness() {
  const BrightnessEstimate b = source_brightness({"p1", 0.284, 0.0}, {"detection", 0.6, 0.0}, {"preparation", 0.74, 0.0});
  return {std::abs(b.value - 0.64) <= 0.01, fmt("0.284/(0.6*0.74) = %.4f, target 0.64 +- 0.01", b.value)};
}

Outcome oracle_equivalence() {
  double worst_dev = 0.0, worst_fid = 1.0, worst_aligned = 1.0, max_delay = 0.0;
  std::string worst_dev_at, worst_fid_at;
  for (double T : {0.3, 0.5, 1.0}) {
    const TemporalMode target = make_shape(sech(T, 1000));
    for (double delta : {-40.0, -20.0, -10.0, 10.0}) {
      const EmissionReport r = emission_experiment(kCavity, scheme(delta), target, PulseOptions{}, SimOptions{});
      const double dev = std::abs(r.coherent_efficiency / r.analytic_efficiency - 1.0);
      const std::string at = fmt("T=%.1f us, delta=%+.0f MHz", T, delta);
      if (dev >= worst_dev) {
        worst_dev = dev;
        worst_dev_at = at;
      }
      if (r.mode_fidelity <= worst_fid) {
        worst_fid = r.mode_fidelity;
        worst_fid_at = at;
      }
      worst_aligned = std::min(worst_aligned, r.aligned_mode_fidelity);
      max_delay = std::max(max_delay, r.arrival_delay);
    }
  }
  return {worst_dev <= 0.05 && worst_fid >= 0.98,
          fmt("12 cases; worst efficiency deviation %.2f%% (%s, limit 5%%); lowest mode fidelity %.4f (%s, limit 0.98); "
              "output lags the target by up to %.0f ns, lowest fidelity after removing the lag %.4f",
              100.0 * worst_dev, worst_dev_at.c_str(), worst_fid, worst_fid_at.c_str(), 1e3 * max_delay, worst_aligned)};
}

Outcome chirp_property() {
  const LevelScheme s = scheme(-20.0);
  const double alpha = adiabatic_coeffs(kCavity, s).chirp_factor();
  const TemporalMode target = make_shape(sech(0.5, 2000));
  const std::vector<cplx> u = bin_mode(target, kGrid);
  const SynthOptions mix{RecordGenerator::FockMixture, 1};
  const std::size_t N = 20000;
  const ReconstructedMode on = reconstruct(synth_records(analytic_photon(target, s, true), 0.284, N, kGrid, 501, mix));
  const ReconstructedMode off = reconstruct(synth_records(analytic_photon(target, s, false), 0.284, N, kGrid, 502, mix));
  const double f_on = on.has_mode ? branch_fidelity(on, u) : 0.0;
  const double f_off = off.has_mode ? branch_fidelity(off, u) : 0.0;
  // Branch maximum: the sign of the reconstructed phase is not observable.
  const double f_restored = off.has_mode ? restored_branch_fidelity(off, u, target, alpha) : 0.0;
  return {f_on >= 0.95 && f_off < f_on - 0.1 && f_restored >= 0.95,
          fmt("delta=-20 MHz, %zu trials: compensated %.4f (>= 0.95), uncompensated %.4f (< compensated - 0.1), "
              "restored with alpha=%+.4f %.4f (>= 0.95)",
              N, f_on, f_off, alpha, f_restored)};
}

Outcome selectivity() {
  const LevelScheme s = scheme(-20.0);
  auto curve = [&](double control_jump) {
    SelectivityOptions o;
    o.control_jump = control_jump;
    const SelectivityCurve c = selectivity_sweep(sech(0.5, 2000), kCavity, s, PulseOptions{}, o);
    std::vector<double> x, y;
    for (const auto& p : c.points) {
      x.push_back(p.delta_phi);
      y.push_back(p.overlap_model);
    }
    return std::make_pair(c, fit_sin2(x, y));
  };
  const auto [c_in, f_in] = curve(0.0);
  const auto [c_ctl, f_ctl] = curve(kPi);
  double at_pi = 1.0;
  for (const auto& p : c_in.points)
    if (std::abs(p.delta_phi - kPi) < 1e-12) at_pi = p.overlap_model;
  const double phi_err = mod_pi_distance(f_in.phi0, kPi / 2.0);
  const double ba = std::abs(f_in.B) / f_in.A;
  const double shift_err = std::abs(fitted_shift(f_in, f_ctl) - kPi);
  return {phi_err <= 0.05 && ba <= 0.02 && std::abs(at_pi) < 1e-12 && shift_err <= 0.05,
          fmt("phi0 - pi/2 = %.2e rad (mod pi), B/A = %.2e, value at pi %.1e, control-jump shift - pi = %.2e rad",
              phi_err, ba, at_pi, shift_err)};
}

Outcome reshape() {
  const TemporalMode in = make_shape(sech(0.5, 2000));
  const TemporalMode out = make_shape(sech(500.0, 2000));
  const ConversionReport ideal =
      convert_shape(in, out, kCavity, scheme(0.0, Variant::OneLevel, CouplingMode::Unit), PulseOptions{});
  const LevelScheme s = scheme(-20.0);
  const ConversionReport full = convert_shape(in, out, kCavity, s, PulseOptions{});

  // Master-equation retrieval leg at the reduced 0.5 us -> 50 us ratio.
  const auto t0 = std::chrono::steady_clock::now();
  SimOptions adaptive;
  adaptive.integrator = Integrator::Adaptive;
  const EmissionReport v = emission_experiment(kCavity, s, make_shape(sech(50.0, 4000)), PulseOptions{}, adaptive);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double v_dev = std::abs(v.coherent_efficiency / v.analytic_efficiency - 1.0);

  const bool pass = std::abs(ideal.relative_deviation) <= 0.02 && std::abs(full.relative_deviation) <= 0.02 &&
                    std::abs(ideal.total - 0.43) <= 0.02 && wall <= 600.0 && v_dev <= 0.05;
  return {pass, fmt("ideal model total %.4f (0.43 +- 0.02, %.2f%% from eta^2); three-level -20 MHz total %.4f "
                    "(%.2f%% from eta^2); 50 us master-equation retrieval %.4f vs analytic %.4f in %.0f s (<= 600 s)",
                    ideal.total, 100.0 * ideal.relative_deviation, full.total, 100.0 * full.relative_deviation,
                    v.coherent_efficiency, v.analytic_efficiency, wall)};
}

Outcome homodyne_statistics() {
  const TemporalMode target = make_shape(sech(0.5, 2000));
  const TemporalMode chirped = analytic_photon(target, scheme(-20.0), false);
  const std::vector<cplx> u = bin_mode(chirped, kGrid);
  const SynthOptions mix{RecordGenerator::FockMixture, 1};

  const std::size_t Nv = 10000;
  const QuadratureRecords vac = synth_records(target, 0.0, Nv, kGrid, 801);
  const ModeDecomposition dv = decompose(autocorrelation(vac), RealMatrix::identity(kGrid.n_bins), kGrid, Nv);
  double vac_dev = 0.0;
  for (double k : dv.eigenvalues) vac_dev = std::max(vac_dev, std::abs(k - 1.0));
  const double vac_limit = 5.0 / std::sqrt(static_cast<double>(Nv));

  const PhotonStats ps = photon_stats(synth_records(chirped, 0.284, 100000, kGrid, 802, mix), u);

  const ReconstructedMode rec = reconstruct(synth_records(chirped, 0.284, 20000, kGrid, 803, mix));
  const double fid = rec.has_mode ? branch_fidelity(rec, u) : 0.0;

  return {vac_dev <= vac_limit && std::abs(ps.p[1] - 0.284) <= 0.02 && fid >= 0.95,
          fmt("vacuum (%zu bins, 1e4 trials) max |eig - 1| %.4f vs 5/sqrt(N) = %.4f; p1 at 1e5 trials %.4f "
              "(0.284 +- 0.02); chirped fidelity at 2e4 trials %.4f (>= 0.95)",
              kGrid.n_bins, vac_dev, vac_limit, ps.p[1], fid)};
}

Outcome conservation() {
  const LevelScheme s = scheme(-20.0);
  const TemporalMode target = make_shape(sech(0.5, 1000));
  const EmissionReport r = emission_experiment(kCavity, s, target, PulseOptions{}, SimOptions{});
  double pop_dev = 0.0;
  for (std::size_t k = 0; k < r.sim.times.size(); ++k) pop_dev = std::max(pop_dev, std::abs(total_population(r.sim, k) - 1.0));

  SimOptions half;
  half.step_bound = 0.5 * SimOptions{}.step_bound;
  const EmissionReport h = emission_experiment(kCavity, s, target, PulseOptions{}, half);
  const double halving = std::abs(h.efficiency - r.efficiency);

  const CqedParams bare{1e-9, kCavity.kappa_c, kCavity.kappa_l, kCavity.gamma};
  const LevelScheme bs = build_scheme(bare, -20.0, Variant::ThreeLevel, default_reference_data());
  const HilbertSpaceSpec sp = build_space(bs);
  SimConfig cfg;
  cfg.t_end = 2.0;
  cfg.output_dt = 0.01;
  cfg.initial.atom_level = static_cast<std::size_t>(sp.find_level(false, 1, 0));
  cfg.initial.photon_mode = kSigmaPlus;
  const SimResult b = evolve(sp, cfg, bare, bs);
  const double ratio = b.out_coupled.back()[kSigmaPlus] / b.lost.back()[kSigmaPlus];
  const double ratio_err = std::abs(ratio / (kCavity.kappa_c / kCavity.kappa_l) - 1.0);

  return {r.sim.max_trace_drift <= 1e-6 && b.max_trace_drift <= 1e-6 && pop_dev <= 1e-6 && ratio_err <= 1e-6 &&
              halving < 1e-4,
          fmt("trace drift %.1e; population+out+lost deviation %.1e; bare-cavity out:lost %.6f (kappa_c:kappa_l = "
              "%.6f); step-halving efficiency change %.1e (< 1e-4)",
              std::max(r.sim.max_trace_drift, b.max_trace_drift), pop_dev, ratio, kCavity.kappa_c / kCavity.kappa_l,
              halving)};
}

Outcome interference_minimum() {
  const LevelScheme ref_scheme = scheme(0.0, Variant::TwoLevel);
  const double f2 = ref_scheme.hyperfine_offsets[1];
  const EfficiencyMinimum am =
      locate_efficiency_minimum(kCavity, Variant::TwoLevel, 1.0, f2 - 1.0, default_reference_data());

  // Spot checks on a fixed grid; least-squares parabola through the
  // coherent efficiencies locates the simulated minimum.
  const TemporalMode target = make_shape(sech(0.5, 1000));
  const std::vector<double> grid{60.0, 66.0, 72.0, 78.0, 84.0, 90.0, 96.0};
  Eigen::MatrixXd A(grid.size(), 3);
  Eigen::VectorXd y(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const EmissionReport r =
        emission_experiment(kCavity, scheme(grid[i], Variant::TwoLevel), target, PulseOptions{}, SimOptions{});
    const double x = grid[i] - 78.0;
    A.row(static_cast<Eigen::Index>(i)) << 1.0, x, x * x;
    y(static_cast<Eigen::Index>(i)) = r.coherent_efficiency;
  }
  const Eigen::Vector3d c = A.colPivHouseholderQr().solve(y);
  const double lmin = 78.0 - c(1) / (2.0 * c(2));
  const bool bracketed = c(2) > 0.0 && lmin > grid.front() && lmin < grid.back();
  const double sep = std::abs(lmin - am.delta);
  return {am.delta > 0.0 && am.delta < f2 && bracketed && sep <= 5.0,
          fmt("analytic two-level minimum %.2f MHz (between 0 and %.3f MHz); master-equation minimum %.2f MHz; "
              "separation %.2f MHz (<= 5)",
              am.delta, f2, lmin, sep)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria of the photonshape toolkit"};
  std::vector<int> only, known;
  app.add_option("--only", only, "Run only these criteria")->check(CLI::Range(1, 10));
  app.add_option("--known-failure", known, "Criteria expected to fail (documented deviations)")
      ->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> all{
      {1, "ideal efficiency anchor", ideal_efficiency},
      {2, "loss budget", loss_budget_chain},
      {3, "brightness inference", brightness},
      {4, "analytic/master-equation equivalence", oracle_equivalence},
      {5, "chirp property", chirp_property},
      {6, "storage selectivity", selectivity},
      {7, "shape conversion", reshape},
      {8, "homodyne statistics", homodyne_statistics},
      {9, "simulator conservation", conservation},
      {10, "interference minimum", interference_minimum},
  };
  const std::set<int> expected_fail(known.begin(), known.end());
  int passed = 0, failed = 0, unexpected = 0;
  for (const Criterion& c : all) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool listed = expected_fail.count(c.id) > 0;
    std::printf("criterion %2d %s  %s: %s [%.1f s]%s\n", c.id, o.pass ? "PASS" : "FAIL", c.title, o.detail.c_str(),
                secs, listed ? (o.pass ? " (listed as known failure but passed)" : " (known failure)") : "");
    std::fflush(stdout);
    o.pass ? ++passed : ++failed;
    if (o.pass == listed) ++unexpected;
  }
  std::printf("%d passed, %d failed, %d unexpected\n", passed, failed, unexpected);
  return unexpected == 0 ? 0 : 1;
}
