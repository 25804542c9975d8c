#include <cmath>
#include <random>

#include "photonshape/error.hpp"
#include "photonshape/homodyne.hpp"
#include "photonshape/parallel.hpp"

namespace photonshape {
namespace {

cplx interpolate_at(const TemporalMode& mode, double t) {
  const double x = (t - mode.t0()) / mode.dt();
  if (x < 0.0 || x > static_cast<double>(mode.size() - 1)) return 0.0;
  const auto j = std::min(static_cast<std::size_t>(x), mode.size() - 2);
  const double f = x - static_cast<double>(j);
  return (1.0 - f) * mode[j] + f * mode[j + 1];
}

double dot(const std::vector<double>& a, const double* x) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * x[i];
  return s;
}

void sign_convention(std::vector<double>& e) {
  std::size_t big = 0;
  for (std::size_t k = 0; k < e.size(); ++k) {
    if (std::abs(e[k]) > std::abs(e[big]) + 1e-12) big = k;
  }
  if (e[big] < 0.0) {
    for (double& x : e) x = -x;
  }
}

}  // namespace

void validate(const RecordGrid& grid) {
  require(std::isfinite(grid.t_start), ErrorCode::InvalidArgument, "record grid start must be finite");
  require(std::isfinite(grid.bin_width) && grid.bin_width > 0.0, ErrorCode::InvalidArgument,
          "record grid bin width must be positive");
  require(grid.n_bins >= 1, ErrorCode::InvalidArgument, "record grid needs at least one bin");
}

std::vector<cplx> bin_mode(const TemporalMode& mode, const RecordGrid& grid) {
  validate(grid);
  std::vector<cplx> sum(grid.n_bins, 0.0);
  std::vector<std::size_t> count(grid.n_bins, 0);
  for (std::size_t j = 0; j < mode.size(); ++j) {
    const double x = (mode.time(j) - grid.t_start) / grid.bin_width;
    if (x < 0.0 || x >= static_cast<double>(grid.n_bins)) continue;
    const auto b = static_cast<std::size_t>(x);
    sum[b] += mode[j];
    ++count[b];
  }
  double norm = 0.0;
  for (std::size_t b = 0; b < grid.n_bins; ++b) {
    const cplx mean = count[b] ? sum[b] / static_cast<double>(count[b])
                               : interpolate_at(mode, grid.centre(b));
    sum[b] = mean * std::sqrt(grid.bin_width);
    norm += std::norm(sum[b]);
  }
  require(norm > 1e-300, ErrorCode::InvalidArgument, "mode has no support on the record grid");
  for (auto& u : sum) u /= std::sqrt(norm);
  return sum;
}

RealImagDecomposition decompose_real_imag(const std::vector<cplx>& u, double p1) {
  require(p1 >= 0.0 && p1 <= 1.0, ErrorCode::InvalidArgument, "p1 must lie in [0, 1]");
  require(!u.empty(), ErrorCode::InvalidArgument, "mode vector is empty");
  const std::size_t n = u.size();
  double norm = 0.0;
  for (const auto& x : u) norm += std::norm(x);
  require(norm > 1e-300, ErrorCode::InvalidArgument, "mode vector is zero");
  const double scale = 1.0 / std::sqrt(norm);
  std::vector<double> a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = u[i].real() * scale;
    b[i] = u[i].imag() * scale;
  }
  double g11 = 0.0, g22 = 0.0, g12 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    g11 += a[i] * a[i];
    g22 += b[i] * b[i];
    g12 += a[i] * b[i];
  }
  const double mean = 0.5 * (g11 + g22);
  const double rad = std::sqrt(0.25 * (g11 - g22) * (g11 - g22) + g12 * g12);
  RealImagDecomposition d;
  d.lambda = {mean + rad, std::max(0.0, mean - rad)};
  for (int i = 0; i < 2; ++i) {
    d.e[i].assign(n, 0.0);
    if (d.lambda[i] <= 1e-12 * d.lambda[0]) {
      d.lambda[i] = 0.0;
      continue;
    }
    // Gram eigenvector (c_a, c_b); pick the better-conditioned of the two forms.
    double ca = g12, cb = d.lambda[i] - g11;
    const double ca2 = d.lambda[i] - g22, cb2 = g12;
    if (ca2 * ca2 + cb2 * cb2 > ca * ca + cb * cb) {
      ca = ca2;
      cb = cb2;
    }
    if (ca == 0.0 && cb == 0.0) {
      ca = (i == 0) == (g11 >= g22) ? 1.0 : 0.0;
      cb = 1.0 - ca;
    }
    const double cn = std::hypot(ca, cb);
    ca /= cn;
    cb /= cn;
    for (std::size_t k = 0; k < n; ++k) d.e[i][k] = (ca * a[k] + cb * b[k]) / std::sqrt(d.lambda[i]);
    sign_convention(d.e[i]);
  }
  d.n = {p1 * d.lambda[0], p1 * d.lambda[1]};
  return d;
}

RealMatrix analytic_covariance(const RealImagDecomposition& d, std::size_t n_bins) {
  RealMatrix c = RealMatrix::identity(n_bins);
  for (int i = 0; i < 2; ++i) {
    if (d.n[i] == 0.0) continue;
    require(d.e[i].size() == n_bins, ErrorCode::GridMismatch, "decomposition lives on another grid");
    for (std::size_t r = 0; r < n_bins; ++r) {
      for (std::size_t s = 0; s < n_bins; ++s) c(r, s) += 2.0 * d.n[i] * d.e[i][r] * d.e[i][s];
    }
  }
  return c;
}

QuadratureRecords synth_records(const TemporalMode& mode, double p1, std::size_t trials,
                                const RecordGrid& grid, std::uint64_t seed, const SynthOptions& opts) {
  require(trials >= 1, ErrorCode::InvalidArgument, "at least one trial is required");
  const RealImagDecomposition d = decompose_real_imag(bin_mode(mode, grid), p1);
  const std::size_t nb = grid.n_bins;
  QuadratureRecords rec;
  rec.grid = grid;
  rec.trials = trials;
  rec.data.assign(trials * nb, 0.0);
  const std::array<double, 2> gain = {std::sqrt(1.0 + 2.0 * d.n[0]) - 1.0,
                                      std::sqrt(1.0 + 2.0 * d.n[1]) - 1.0};
  const double w0 = d.lambda[0] / (d.lambda[0] + d.lambda[1]);

  parallel_for(trials, opts.threads, [&](std::size_t k) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> uniform;
    double* x = rec.data.data() + k * nb;
    for (std::size_t b = 0; b < nb; ++b) x[b] = normal(rng);
    if (opts.generator == RecordGenerator::Gaussian) {
      const std::array<double, 2> proj = {dot(d.e[0], x), dot(d.e[1], x)};
      for (int i = 0; i < 2; ++i) {
        if (gain[i] == 0.0) continue;
        for (std::size_t b = 0; b < nb; ++b) x[b] += gain[i] * proj[i] * d.e[i][b];
      }
      return;
    }
    if (uniform(rng) >= p1) return;
    const int i = uniform(rng) < w0 ? 0 : 1;
    double r2 = 0.0;
    for (int c = 0; c < 3; ++c) {
      const double z = normal(rng);
      r2 += z * z;
    }
    // |q| follows the Maxwell law, i.e. density ∝ q² exp(-q²/2).
    const double q = (uniform(rng) < 0.5 ? -1.0 : 1.0) * std::sqrt(r2);
    const double shift = q - dot(d.e[i], x);
    for (std::size_t b = 0; b < nb; ++b) x[b] += shift * d.e[i][b];
  });
  return rec;
}

}  // namespace photonshape
