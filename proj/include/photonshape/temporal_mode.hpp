#pragma once

#include <complex>
#include <optional>
#include <vector>

namespace photonshape {

using cplx = std::complex<double>;

// Sampled complex mode function on t_j = t0 + j·dt (µs), amplitudes in
// µs^-1/2. Invariant: at least 16 samples, dt > 0, Σ|e_j|²·dt = 1 ± 1e-9.
class TemporalMode {
 public:
  static constexpr std::size_t kMinSamples = 16;
  static constexpr double kNormTolerance = 1e-9;

  // Requires already-normalized samples; throws NotNormalized otherwise.
  TemporalMode(double t0, double dt, std::vector<cplx> samples);

  // Rescales arbitrary nonzero samples to unit norm.
  static TemporalMode normalized(double t0, double dt, std::vector<cplx> samples);

  double t0() const { return t0_; }
  double dt() const { return dt_; }
  std::size_t size() const { return samples_.size(); }
  double time(std::size_t j) const { return t0_ + dt_ * static_cast<double>(j); }
  double t_end() const { return time(size() - 1); }
  const std::vector<cplx>& samples() const { return samples_; }
  cplx operator[](std::size_t j) const { return samples_[j]; }

  double norm() const;
  // R_j = Σ_{k>=j} |e_k|² dt, accumulated from the end.
  std::vector<double> remaining_energy() const;
  // Q_j = Σ_{k<=j} |e_k|² dt, accumulated from the start.
  std::vector<double> cumulative_energy() const;

 private:
  double t0_;
  double dt_;
  std::vector<cplx> samples_;
};

bool same_grid(const TemporalMode& a, const TemporalMode& b);

enum class ShapeFamily { Sech, Gaussian, Square, Custom };

struct PhaseJump {
  double time = 0.0;   // µs
  double phase = 0.0;  // rad, applied for t >= time
};

// Sech: e ∝ sech(2t/T) centred at 0. Gaussian: |e|² ∝ exp(-t²/(2σ²)) centred
// at 0. Square: constant on [0, T). Custom: samples taken as given on the
// window grid.
struct ShapeSpec {
  ShapeFamily family = ShapeFamily::Sech;
  double characteristic = 0.5;  // T or σ (µs)
  double t_min = -2.5;
  double t_max = 2.5;
  std::size_t n_samples = 2000;
  std::vector<cplx> custom;
  std::optional<PhaseJump> phase_jump;
};

TemporalMode make_shape(const ShapeSpec& spec);

// Fraction of the analytic pulse energy inside [t_min, t_max].
double analytic_window_fraction(const ShapeSpec& spec);

TemporalMode time_reverse(const TemporalMode& mode);

cplx overlap(const TemporalMode& f, const TemporalMode& g);
double mode_fidelity(const TemporalMode& f, const TemporalMode& g);

// Linear interpolation of Re/Im onto a new grid (zero outside the source
// support), then renormalized.
TemporalMode resample(const TemporalMode& mode, double t0, double dt, std::size_t n);

// Bin-averaged mode on n_bins equal bins covering [t0, t0 + n_bins·bin_width),
// renormalized. Sample times of the result are bin centres.
TemporalMode bin_average(const TemporalMode& mode, double t0, double bin_width,
                         std::size_t n_bins);

double selection_efficiency(const TemporalMode& input, const TemporalMode& accepted, double eta0);

// Multiplies sample j by exp(i·alpha·ln R_j) with R_j the reference mode's
// remaining energy (floored at r_floor). The reference grid must match.
TemporalMode apply_log_phase(const TemporalMode& mode, const TemporalMode& reference, double alpha,
                             double r_floor = 1e-12);

}  // namespace photonshape
