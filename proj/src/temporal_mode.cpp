#include "photonshape/temporal_mode.hpp"

#include <algorithm>
#include <cmath>

#include "photonshape/error.hpp"

namespace photonshape {
namespace {

double sum_energy(const std::vector<cplx>& s, double dt) {
  double acc = 0.0;
  for (const auto& x : s) acc += std::norm(x);
  return acc * dt;
}

void check_grid(double dt, std::size_t n) {
  require(std::isfinite(dt) && dt > 0.0, ErrorCode::InvalidArgument, "grid step must be positive");
  require(n >= TemporalMode::kMinSamples, ErrorCode::InvalidArgument,
          "temporal mode needs at least 16 samples");
}

}  // namespace

TemporalMode::TemporalMode(double t0, double dt, std::vector<cplx> samples)
    : t0_(t0), dt_(dt), samples_(std::move(samples)) {
  check_grid(dt_, samples_.size());
  require(std::isfinite(t0_), ErrorCode::InvalidArgument, "grid origin must be finite");
  for (const auto& x : samples_) {
    require(std::isfinite(x.real()) && std::isfinite(x.imag()), ErrorCode::InvalidArgument,
            "mode samples must be finite");
  }
  const double n = sum_energy(samples_, dt_);
  require(std::abs(n - 1.0) <= kNormTolerance, ErrorCode::NotNormalized,
          "mode is not normalized (norm " + std::to_string(n) + ")");
}

TemporalMode TemporalMode::normalized(double t0, double dt, std::vector<cplx> samples) {
  check_grid(dt, samples.size());
  const double n = sum_energy(samples, dt);
  require(std::isfinite(n) && n > 0.0, ErrorCode::NotNormalized, "mode has zero or invalid norm");
  const double s = 1.0 / std::sqrt(n);
  for (auto& x : samples) x *= s;
  return TemporalMode(t0, dt, std::move(samples));
}

double TemporalMode::norm() const { return sum_energy(samples_, dt_); }

std::vector<double> TemporalMode::remaining_energy() const {
  std::vector<double> r(samples_.size());
  double acc = 0.0;
  for (std::size_t k = samples_.size(); k-- > 0;) {
    acc += std::norm(samples_[k]) * dt_;
    r[k] = acc;
  }
  return r;
}

std::vector<double> TemporalMode::cumulative_energy() const {
  std::vector<double> q(samples_.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < samples_.size(); ++k) {
    acc += std::norm(samples_[k]) * dt_;
    q[k] = acc;
  }
  return q;
}

bool same_grid(const TemporalMode& a, const TemporalMode& b) {
  return a.size() == b.size() && std::abs(a.dt() - b.dt()) <= 1e-12 * a.dt() &&
         std::abs(a.t0() - b.t0()) <= 1e-9 * a.dt();
}

double analytic_window_fraction(const ShapeSpec& spec) {
  const double a = spec.t_min, b = spec.t_max, c = spec.characteristic;
  switch (spec.family) {
    case ShapeFamily::Sech:
      // ∫ sech²(2t/T) dt = (T/2) tanh(2t/T)
      return 0.5 * (std::tanh(2.0 * b / c) - std::tanh(2.0 * a / c));
    case ShapeFamily::Gaussian:
      return 0.5 * (std::erf(b / (std::sqrt(2.0) * c)) - std::erf(a / (std::sqrt(2.0) * c)));
    case ShapeFamily::Square:
      return std::max(0.0, std::min(b, c) - std::max(a, 0.0)) / c;
    case ShapeFamily::Custom:
      return 1.0;
  }
  return 0.0;
}

TemporalMode make_shape(const ShapeSpec& spec) {
  require(std::isfinite(spec.t_min) && std::isfinite(spec.t_max) && spec.t_max > spec.t_min,
          ErrorCode::InvalidArgument, "shape window must be finite and increasing");
  std::size_t n = spec.n_samples;
  if (spec.family == ShapeFamily::Custom) {
    n = spec.custom.size();
  } else {
    require(std::isfinite(spec.characteristic) && spec.characteristic > 0.0,
            ErrorCode::InvalidArgument, "characteristic time must be positive");
  }
  require(n >= TemporalMode::kMinSamples, ErrorCode::InvalidArgument,
          "shape needs at least 16 samples");
  const double fraction = analytic_window_fraction(spec);
  require(fraction >= 0.999, ErrorCode::WindowTooSmall,
          "window captures only " + std::to_string(fraction) + " of the pulse energy");

  const double dt = (spec.t_max - spec.t_min) / static_cast<double>(n - 1);
  const double eps = 1e-9 * dt;
  std::vector<cplx> s(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double t = spec.t_min + dt * static_cast<double>(j);
    switch (spec.family) {
      case ShapeFamily::Sech:
        s[j] = 1.0 / std::cosh(2.0 * t / spec.characteristic);
        break;
      case ShapeFamily::Gaussian:
        s[j] = std::exp(-t * t / (4.0 * spec.characteristic * spec.characteristic));
        break;
      case ShapeFamily::Square:
        s[j] = (t >= -eps && t < spec.characteristic - eps) ? 1.0 : 0.0;
        break;
      case ShapeFamily::Custom:
        s[j] = spec.custom[j];
        break;
    }
    if (spec.phase_jump && t >= spec.phase_jump->time - eps) {
      s[j] *= std::polar(1.0, spec.phase_jump->phase);
    }
  }
  return TemporalMode::normalized(spec.t_min, dt, std::move(s));
}

TemporalMode time_reverse(const TemporalMode& mode) {
  const std::size_t n = mode.size();
  std::vector<cplx> s(n);
  for (std::size_t j = 0; j < n; ++j) s[j] = std::conj(mode[n - 1 - j]);
  return TemporalMode(-mode.t_end(), mode.dt(), std::move(s));
}

cplx overlap(const TemporalMode& f, const TemporalMode& g) {
  require(same_grid(f, g), ErrorCode::GridMismatch, "modes live on different grids; resample first");
  cplx acc = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) acc += std::conj(f[j]) * g[j];
  return acc * f.dt();
}

double mode_fidelity(const TemporalMode& f, const TemporalMode& g) {
  return std::min(1.0, std::norm(overlap(f, g)));
}

namespace {

cplx interpolate(const TemporalMode& m, double t) {
  const double x = (t - m.t0()) / m.dt();
  if (x < -1e-9 || x > static_cast<double>(m.size() - 1) + 1e-9) return 0.0;
  const double xc = std::clamp(x, 0.0, static_cast<double>(m.size() - 1));
  const std::size_t i = std::min(static_cast<std::size_t>(xc), m.size() - 2);
  const double w = xc - static_cast<double>(i);
  return (1.0 - w) * m[i] + w * m[i + 1];
}

}  // namespace

TemporalMode resample(const TemporalMode& mode, double t0, double dt, std::size_t n) {
  check_grid(dt, n);
  std::vector<cplx> s(n);
  for (std::size_t j = 0; j < n; ++j) s[j] = interpolate(mode, t0 + dt * static_cast<double>(j));
  return TemporalMode::normalized(t0, dt, std::move(s));
}

TemporalMode bin_average(const TemporalMode& mode, double t0, double bin_width,
                         std::size_t n_bins) {
  check_grid(bin_width, n_bins);
  std::vector<cplx> s(n_bins, 0.0);
  std::vector<std::size_t> count(n_bins, 0);
  for (std::size_t j = 0; j < mode.size(); ++j) {
    const double x = (mode.time(j) - t0) / bin_width;
    if (x < 0.0 || x >= static_cast<double>(n_bins)) continue;
    const auto b = static_cast<std::size_t>(x);
    s[b] += mode[j];
    ++count[b];
  }
  for (std::size_t b = 0; b < n_bins; ++b) {
    s[b] = count[b] ? s[b] / static_cast<double>(count[b])
                    : interpolate(mode, t0 + (static_cast<double>(b) + 0.5) * bin_width);
  }
  return TemporalMode::normalized(t0 + 0.5 * bin_width, bin_width, std::move(s));
}

double selection_efficiency(const TemporalMode& input, const TemporalMode& accepted, double eta0) {
  require(eta0 >= 0.0 && eta0 <= 1.0, ErrorCode::InvalidArgument, "eta0 must lie in [0, 1]");
  return eta0 * mode_fidelity(input, accepted);
}

TemporalMode apply_log_phase(const TemporalMode& mode, const TemporalMode& reference, double alpha,
                             double r_floor) {
  require(same_grid(mode, reference), ErrorCode::GridMismatch,
          "phase reference lives on a different grid");
  const auto R = reference.remaining_energy();
  std::vector<cplx> s(mode.size());
  for (std::size_t j = 0; j < mode.size(); ++j) {
    s[j] = mode[j] * std::polar(1.0, alpha * std::log(std::max(R[j], r_floor)));
  }
  return TemporalMode::normalized(mode.t0(), mode.dt(), std::move(s));
}

}  // namespace photonshape
