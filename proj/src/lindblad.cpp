#include <algorithm>
#include <cmath>

#include "photonshape/error.hpp"
#include "photonshape/lindblad.hpp"
#include "photonshape/units.hpp"

namespace photonshape {
namespace {

struct Entry {
  int r;
  int c;
  cplx v;
};

// Population leaving the block through one collapse operator into one
// target state outside it: rate = Σ_ab v_a ρ_ab v_b*.
struct Leak {
  int slot;
  std::vector<std::pair<int, cplx>> cols;
};

struct BlockModel {
  int B = 0;
  std::vector<std::size_t> states;  // block index -> full index
  std::vector<Entry> h_static;      // H(Ω=0) - (i/2)Σ c†c
  std::vector<Entry> a;             // coefficient of Ω
  std::vector<Entry> a_dag;         // coefficient of Ω*
  std::vector<std::vector<Entry>> jumps;
  std::vector<Leak> leaks;
  std::vector<std::size_t> ground_states;  // zero-excitation states (accumulator slots)
  int n_acc = 0;
  int sink_slot0 = 0;
  int coherent_slot = 0;
  int signal_index = -1;
  double signal_amp = 0.0;
};

BlockModel build_block(const HilbertSpaceSpec& space, const CqedParams& params,
                       const LevelScheme& scheme) {
  const std::size_t D = space.dimension();
  BlockModel m;
  std::vector<int> block_of(D, -1), ground_of(D, -1);
  for (std::size_t i = 0; i < D; ++i) {
    const int n = space.excitation_number(i);
    if (n == 1) {
      block_of[i] = static_cast<int>(m.states.size());
      m.states.push_back(i);
    } else if (n == 0) {
      ground_of[i] = static_cast<int>(m.ground_states.size());
      m.ground_states.push_back(i);
    }
  }
  m.B = static_cast<int>(m.states.size());
  m.sink_slot0 = static_cast<int>(m.ground_states.size());
  m.coherent_slot = m.sink_slot0 + 4;
  m.n_acc = m.coherent_slot + 1;

  const OperatorMatrix h0 = build_hamiltonian(space, 0.0, params, scheme);
  const OperatorMatrix ctrl = control_operator(space, scheme);
  const auto block_entries = [&](const OperatorMatrix& op, std::vector<Entry>& out) {
    for (const auto& e : op.entries) {
      const int r = block_of[e.row], c = block_of[e.col];
      const bool rin = r >= 0, cin = c >= 0;
      require(rin == cin, ErrorCode::IntegratorFailure,
              "internal: Hamiltonian does not conserve excitation number");
      if (rin) out.push_back({r, c, e.value});
    }
  };
  block_entries(h0, m.h_static);
  block_entries(ctrl, m.a);
  block_entries(ctrl.adjoint(), m.a_dag);

  const auto ops = build_collapse_ops(space, params, scheme);
  std::vector<std::vector<cplx>> cdc(m.B, std::vector<cplx>(m.B, 0.0));
  for (const auto& op : ops) {
    std::vector<Entry> jump;
    std::vector<std::vector<std::pair<int, cplx>>> by_row(D);
    for (const auto& e : op.op.entries) {
      const int c = block_of[e.col];
      if (c < 0) continue;
      by_row[e.row].push_back({c, e.value});
      const int r = block_of[e.row];
      if (r >= 0) {
        jump.push_back({r, c, e.value});
      } else {
        require(ground_of[e.row] >= 0, ErrorCode::IntegratorFailure,
                "internal: collapse operator leaves the tracked sectors");
      }
    }
    for (std::size_t row = 0; row < D; ++row) {
      const auto& cols = by_row[row];
      for (const auto& [c1, v1] : cols) {
        for (const auto& [c2, v2] : cols) cdc[c1][c2] += std::conj(v1) * v2;
      }
      if (cols.empty() || block_of[row] >= 0) continue;
      const int slot = op.sink >= 0 ? m.sink_slot0 + op.sink : ground_of[row];
      m.leaks.push_back({slot, cols});
    }
    if (!jump.empty()) m.jumps.push_back(std::move(jump));
  }
  for (int i = 0; i < m.B; ++i) {
    for (int j = 0; j < m.B; ++j) {
      if (cdc[i][j] != cplx(0.0)) m.h_static.push_back({i, j, cplx(0.0, -0.5) * cdc[i][j]});
    }
  }

  const ReferenceData& ref = scheme.reference;
  const int mode = signal_mode(scheme);
  const int gl = space.find_level(false, ref.lambda_ground_F, ref.lambda_ground_m);
  require(gl >= 0, ErrorCode::Configuration, "Λ ground level missing from the space");
  const std::size_t sig = mode == kSigmaPlus ? space.index(gl, 1, 0) : space.index(gl, 0, 1);
  m.signal_index = block_of[sig];
  m.signal_amp = std::sqrt(2.0 * units::angular(params.kappa_c));
  return m;
}

class Rhs {
 public:
  Rhs(const BlockModel& m, const ControlPulse* pulse)
      : m_(m), pulse_(pulse), X_(static_cast<std::size_t>(m.B) * m.B) {}

  cplx omega(double t) const {
    if (!pulse_ || pulse_->size() < 2) return 0.0;
    const double x = (t - pulse_->t0) / pulse_->dt;
    const double last = static_cast<double>(pulse_->size() - 1);
    if (x < 0.0 || x > last) return 0.0;
    const std::size_t i = std::min(static_cast<std::size_t>(x), pulse_->size() - 2);
    const double w = x - static_cast<double>(i);
    return (1.0 - w) * pulse_->omega[i] + w * pulse_->omega[i + 1];
  }

  void operator()(double t, const cplx* y, cplx* dy) {
    const int B = m_.B;
    const cplx* rho = y;
    const cplx* psi = y + B * B;
    cplx* drho = dy;
    cplx* dpsi = dy + B * B;
    cplx* dacc = dy + B * B + B;
    const cplx w = omega(t);
    const cplx wc = std::conj(w);

    std::fill(X_.begin(), X_.end(), cplx(0.0));
    std::fill(dpsi, dpsi + B, cplx(0.0));
    const auto apply = [&](const std::vector<Entry>& list, cplx scale) {
      for (const auto& e : list) {
        const cplx v = e.v * scale;
        cplx* xr = &X_[static_cast<std::size_t>(e.r) * B];
        const cplx* rr = rho + static_cast<std::size_t>(e.c) * B;
        for (int k = 0; k < B; ++k) xr[k] += v * rr[k];
        dpsi[e.r] += v * psi[e.c];
      }
    };
    apply(m_.h_static, 1.0);
    if (w != cplx(0.0)) {
      apply(m_.a, w);
      apply(m_.a_dag, wc);
    }
    const cplx mi(0.0, -1.0);
    for (int i = 0; i < B; ++i) {
      dpsi[i] *= mi;
      for (int j = 0; j < B; ++j) {
        // -i(Hρ) + (-i(Hρ))†
        drho[i * B + j] = mi * X_[i * B + j] + std::conj(mi * X_[j * B + i]);
      }
    }
    for (const auto& jump : m_.jumps) {
      for (const auto& e1 : jump) {
        for (const auto& e2 : jump) {
          drho[e1.r * B + e2.r] += e1.v * rho[e1.c * B + e2.c] * std::conj(e2.v);
        }
      }
    }
    std::fill(dacc, dacc + m_.n_acc, cplx(0.0));
    for (const auto& leak : m_.leaks) {
      double rate = 0.0;
      for (const auto& [a, va] : leak.cols) {
        for (const auto& [b, vb] : leak.cols) rate += (va * rho[a * B + b] * std::conj(vb)).real();
      }
      dacc[leak.slot] += rate;
    }
    if (m_.signal_index >= 0) dacc[m_.coherent_slot] = std::norm(m_.signal_amp * psi[m_.signal_index]);
  }

 private:
  const BlockModel& m_;
  const ControlPulse* pulse_;
  std::vector<cplx> X_;
};

void axpy(std::vector<cplx>& out, const std::vector<cplx>& y, double h,
          std::initializer_list<std::pair<double, const std::vector<cplx>*>> terms) {
  for (std::size_t i = 0; i < y.size(); ++i) {
    cplx acc = 0.0;
    for (const auto& [c, k] : terms) acc += c * (*k)[i];
    out[i] = y[i] + h * acc;
  }
}

class Rk4 {
 public:
  explicit Rk4(std::size_t n) : k1_(n), k2_(n), k3_(n), k4_(n), tmp_(n) {}
  void step(Rhs& f, double t, double h, std::vector<cplx>& y) {
    f(t, y.data(), k1_.data());
    axpy(tmp_, y, 0.5 * h, {{1.0, &k1_}});
    f(t + 0.5 * h, tmp_.data(), k2_.data());
    axpy(tmp_, y, 0.5 * h, {{1.0, &k2_}});
    f(t + 0.5 * h, tmp_.data(), k3_.data());
    axpy(tmp_, y, h, {{1.0, &k3_}});
    f(t + h, tmp_.data(), k4_.data());
    for (std::size_t i = 0; i < y.size(); ++i) {
      y[i] += h / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
    }
  }

 private:
  std::vector<cplx> k1_, k2_, k3_, k4_, tmp_;
};

// Dormand-Prince 5(4) with first-same-as-last.
class Dopri5 {
 public:
  Dopri5(std::size_t n, double rtol, double atol)
      : rtol_(rtol), atol_(atol), k_(7, std::vector<cplx>(n)), tmp_(n) {}

  // Advances y from t to t_target; h carries the step-size estimate.
  void advance(Rhs& f, double& t, double t_target, double& h, double h_max, std::vector<cplx>& y,
               std::size_t& steps, double& h_min_used) {
    static constexpr double c[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
    static constexpr double a[7][6] = {
        {},
        {1.0 / 5},
        {3.0 / 40, 9.0 / 40},
        {44.0 / 45, -56.0 / 15, 32.0 / 9},
        {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
        {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
        {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
    static constexpr double e[7] = {35.0 / 384 - 5179.0 / 57600,    0.0,
                                    500.0 / 1113 - 7571.0 / 16695,  125.0 / 192 - 393.0 / 640,
                                    -2187.0 / 6784 + 92097.0 / 339200, 11.0 / 84 - 187.0 / 2100,
                                    -1.0 / 40};
    const std::size_t n = y.size();
    bool have_k0 = false;
    while (t < t_target) {
      const double step = std::min(h, t_target - t);
      const bool last = step >= t_target - t;
      if (!have_k0) {
        f(t, y.data(), k_[0].data());
        have_k0 = true;
      }
      for (int s = 1; s < 7; ++s) {
        for (std::size_t i = 0; i < n; ++i) {
          cplx acc = 0.0;
          for (int j = 0; j < s; ++j) acc += a[s][j] * k_[j][i];
          tmp_[i] = y[i] + step * acc;
        }
        f(t + c[s] * step, tmp_.data(), k_[s].data());
      }
      double err = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        cplx d = 0.0;
        for (int j = 0; j < 7; ++j) d += e[j] * k_[j][i];
        const double scale = atol_ + rtol_ * std::max(std::abs(y[i]), std::abs(tmp_[i]));
        err = std::max(err, std::abs(step * d) / scale);
      }
      const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      if (err <= 1.0) {
        t = last ? t_target : t + step;
        y.swap(tmp_);
        k_[0].swap(k_[6]);
        ++steps;
        h_min_used = h_min_used == 0.0 ? step : std::min(h_min_used, step);
        // A step shortened to hit the output time says nothing about h.
        if (!last || step == h) h = std::min(h_max, step * factor);
      } else {
        h = step * factor;
      }
      require(h > 1e-14, ErrorCode::IntegratorFailure, "adaptive step size underflow");
    }
  }

 private:
  double rtol_, atol_;
  std::vector<std::vector<cplx>> k_;
  std::vector<cplx> tmp_;
};

}  // namespace

SimResult evolve(const HilbertSpaceSpec& space, const SimConfig& cfg, const CqedParams& params,
                 const LevelScheme& scheme) {
  validate(params);
  require(cfg.output_dt > 0.0 && cfg.t_end > cfg.t_start, ErrorCode::InvalidArgument,
          "simulation grid must have positive step and duration");
  require(cfg.step_bound > 0.0, ErrorCode::InvalidArgument, "step bound must be positive");
  const BlockModel m = build_block(space, params, scheme);
  const ReferenceData& ref = scheme.reference;

  const int level = cfg.initial.atom_level
                        ? static_cast<int>(*cfg.initial.atom_level)
                        : space.find_level(false, ref.lambda_storage_F, ref.lambda_storage_m);
  require(level >= 0 && static_cast<std::size_t>(level) < space.atomic_dimension(),
          ErrorCode::InvalidArgument, "initial atomic level not in the space");
  const int mode = cfg.initial.photon_mode;
  require(mode >= -1 && mode <= 1, ErrorCode::InvalidArgument, "initial photon mode must be -1, 0 or 1");
  const std::size_t init = space.index(level, mode == kSigmaPlus ? 1 : 0, mode == kSigmaMinus ? 1 : 0);

  const int B = m.B;
  const std::size_t n_state = static_cast<std::size_t>(B) * B + B + m.n_acc;
  std::vector<cplx> y(n_state, 0.0);
  const auto in_block = std::find(m.states.begin(), m.states.end(), init);
  if (in_block != m.states.end()) {
    const auto b = static_cast<std::size_t>(in_block - m.states.begin());
    y[b * B + b] = 1.0;
    y[static_cast<std::size_t>(B) * B + b] = 1.0;
  } else {
    const auto g = std::find(m.ground_states.begin(), m.ground_states.end(), init);
    require(g != m.ground_states.end(), ErrorCode::InvalidArgument,
            "initial state must carry at most one excitation");
    y[static_cast<std::size_t>(B) * B + B + (g - m.ground_states.begin())] = 1.0;
  }

  const auto delta = scheme.detunings();
  double rate = std::max({params.g, params.kappa(), params.gamma});
  for (int j = 0; j < active_manifolds(scheme.variant); ++j) rate = std::max(rate, std::abs(delta[j]));
  if (cfg.pulse) rate = std::max(rate, cfg.pulse->peak_rabi_mhz());
  double dt_bound = cfg.step_bound / (units::two_pi * rate);
  if (cfg.max_step > 0.0) dt_bound = std::min(dt_bound, cfg.max_step);

  const auto n_out = static_cast<std::size_t>(std::llround((cfg.t_end - cfg.t_start) / cfg.output_dt)) + 1;
  SimResult res;
  res.block_dimension = static_cast<std::size_t>(B);
  res.signal_mode = signal_mode(scheme);
  for (const auto& l : space.atomic_levels) res.level_labels.push_back(l.label());
  const double kc2 = 2.0 * units::angular(params.kappa_c);

  const auto record = [&](double t) {
    res.times.push_back(t);
    std::vector<double> pops(space.atomic_dimension(), 0.0);
    std::array<double, 2> n{0.0, 0.0};
    double tr = 0.0;
    for (int i = 0; i < B; ++i) {
      const double p = y[static_cast<std::size_t>(i) * B + i].real();
      tr += p;
      const std::size_t s = m.states[i];
      const int np = space.photons(s, kSigmaPlus), nm = space.photons(s, kSigmaMinus);
      if (np + nm == 0) pops[space.atom_of(s)] += p;
      n[kSigmaPlus] += np * p;
      n[kSigmaMinus] += nm * p;
    }
    const cplx* acc = y.data() + static_cast<std::size_t>(B) * B + B;
    for (std::size_t g = 0; g < m.ground_states.size(); ++g) {
      pops[space.atom_of(m.ground_states[g])] += acc[g].real();
      tr += acc[g].real();
    }
    std::array<double, 2> out{acc[m.sink_slot0 + 0].real(), acc[m.sink_slot0 + 2].real()};
    std::array<double, 2> lost{acc[m.sink_slot0 + 1].real(), acc[m.sink_slot0 + 3].real()};
    tr += out[0] + out[1] + lost[0] + lost[1];
    res.atomic_populations.push_back(std::move(pops));
    res.photon_number.push_back(n);
    res.flux_out.push_back({kc2 * n[0], kc2 * n[1]});
    res.out_coupled.push_back(out);
    res.lost.push_back(lost);
    res.trace.push_back(tr);
    res.coherent_amplitude.push_back(
        m.signal_index >= 0 ? m.signal_amp * y[static_cast<std::size_t>(B) * B + m.signal_index] : 0.0);
    res.coherent_cumulative.push_back(acc[m.coherent_slot].real());
    const double drift = std::abs(tr - 1.0);
    res.max_trace_drift = std::max(res.max_trace_drift, drift);
    if (drift > cfg.trace_tolerance) {
      fail(ErrorCode::IntegratorFailure,
           "trace drift " + std::to_string(drift) + " at t = " + std::to_string(t) +
               " us exceeds tolerance; reduce the step bound");
    }
  };

  Rhs f(m, cfg.pulse);
  record(cfg.t_start);
  if (cfg.integrator == Integrator::RK4) {
    const auto sub = static_cast<std::size_t>(std::ceil(cfg.output_dt / dt_bound - 1e-9));
    const double h = cfg.output_dt / static_cast<double>(std::max<std::size_t>(1, sub));
    res.step = h;
    Rk4 rk(n_state);
    for (std::size_t k = 1; k < n_out; ++k) {
      const double t0 = cfg.t_start + cfg.output_dt * static_cast<double>(k - 1);
      for (std::size_t s = 0; s < std::max<std::size_t>(1, sub); ++s) {
        rk.step(f, t0 + h * static_cast<double>(s), h, y);
        ++res.steps;
      }
      record(cfg.t_start + cfg.output_dt * static_cast<double>(k));
    }
  } else {
    Dopri5 dp(n_state, cfg.rtol, cfg.atol);
    double t = cfg.t_start;
    const double h_max = cfg.max_step > 0.0 ? cfg.max_step : cfg.output_dt;
    double h = std::min(h_max, 10.0 * dt_bound);
    double h_min = 0.0;
    for (std::size_t k = 1; k < n_out; ++k) {
      const double target = cfg.t_start + cfg.output_dt * static_cast<double>(k);
      dp.advance(f, t, target, h, h_max, y, res.steps, h_min);
      record(target);
    }
    res.step = h_min;
  }
  return res;
}

}  // namespace photonshape
