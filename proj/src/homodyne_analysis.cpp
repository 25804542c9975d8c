#include <algorithm>
#include <cmath>

#include "photonshape/error.hpp"
#include "photonshape/homodyne.hpp"

namespace photonshape {

RealMatrix autocorrelation(const QuadratureRecords& records, bool subtract_mean) {
  validate(records.grid);
  require(records.trials >= 2, ErrorCode::InvalidArgument, "autocorrelation needs at least two trials");
  require(records.data.size() == records.trials * records.grid.n_bins, ErrorCode::InvalidArgument,
          "record matrix does not match its header");
  const std::size_t n = records.grid.n_bins;
  std::vector<double> mean(n, 0.0);
  if (subtract_mean) {
    for (std::size_t k = 0; k < records.trials; ++k) {
      const double* x = records.trial(k);
      for (std::size_t i = 0; i < n; ++i) mean[i] += x[i];
    }
    for (double& m : mean) m /= static_cast<double>(records.trials);
  }
  RealMatrix c(n, n);
  std::vector<double> y(n);
  for (std::size_t k = 0; k < records.trials; ++k) {
    const double* x = records.trial(k);
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] - mean[i];
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) c(i, j) += y[i] * y[j];
    }
  }
  const double denom = static_cast<double>(subtract_mean ? records.trials - 1 : records.trials);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      c(i, j) /= denom;
      c(j, i) = c(i, j);
    }
  }
  return c;
}

ModeDecomposition decompose(const RealMatrix& corr, const RealMatrix& vacuum_ref,
                            const RecordGrid& grid, std::size_t trials) {
  validate(grid);
  const std::size_t n = grid.n_bins;
  require(corr.rows == n && corr.cols == n && vacuum_ref.rows == n && vacuum_ref.cols == n,
          ErrorCode::GridMismatch, "correlation and vacuum reference must match the record grid");
  for (const RealMatrix* m : {&corr, &vacuum_ref}) {
    double scale = 1.0;
    for (double x : m->v) scale = std::max(scale, std::abs(x));
    require(m->symmetry_residual() <= 1e-9 * scale, ErrorCode::InvalidArgument,
            "correlation matrices must be symmetric");
  }

  RealMatrix normalized = corr;
  if (vacuum_ref.v != RealMatrix::identity(n).v) {
    const EigenSystem ve = jacobi_eigen(vacuum_ref);
    require(ve.values.back() > 0.0, ErrorCode::InvalidArgument,
            "vacuum reference must be positive definite");
    RealMatrix w(n, n);
    for (std::size_t k = 0; k < n; ++k) {
      const double s = 1.0 / std::sqrt(ve.values[k]);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) w(i, j) += s * ve.vectors[k][i] * ve.vectors[k][j];
      }
    }
    RealMatrix wc(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) s += w(i, k) * corr(k, j);
        wc(i, j) = s;
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) s += wc(i, k) * w(k, j);
        normalized(i, j) = s;
      }
    }
  }

  const EigenSystem es = jacobi_eigen(normalized);
  ModeDecomposition d;
  d.grid = grid;
  d.trials = trials;
  const double inv_sqrt_w = 1.0 / std::sqrt(grid.bin_width);
  for (std::size_t k = 0; k < n; ++k) {
    d.eigenvalues.push_back(es.values[k]);
    d.photon_numbers.push_back(0.5 * (es.values[k] - 1.0));
    std::vector<double> f = es.vectors[k];
    for (double& x : f) x *= inv_sqrt_w;
    d.eigenfunctions.push_back(std::move(f));
  }
  return d;
}

double significance_threshold(std::size_t trials, std::size_t n_bins) {
  require(trials >= 1, ErrorCode::InvalidArgument, "threshold needs a positive trial count");
  const double N = static_cast<double>(trials);
  const double r = static_cast<double>(n_bins) / N;
  return 5.0 / std::sqrt(N) + 2.0 * std::sqrt(r) + r;
}

std::vector<cplx> ReconstructedMode::bin_vector(bool conjugate) const {
  std::vector<cplx> u(mode.size());
  const double s = std::sqrt(grid.bin_width);
  for (std::size_t b = 0; b < mode.size(); ++b) u[b] = (conjugate ? std::conj(mode[b]) : mode[b]) * s;
  return u;
}

ReconstructedMode reconstruct_mode(const ModeDecomposition& dec, double threshold, double phase_floor) {
  ReconstructedMode r;
  r.grid = dec.grid;
  if (threshold <= 0.0) {
    threshold = dec.trials > 0 ? significance_threshold(dec.trials, dec.grid.n_bins) : 1e-9;
  }
  r.threshold = threshold;
  for (double k : dec.eigenvalues) {
    if (k > 1.0 + threshold) ++r.significant;
  }
  if (r.significant > 2) {
    fail(ErrorCode::MultimodeSignal, std::to_string(r.significant) +
                                         " eigenvalues exceed the vacuum level; the signal "
                                         "occupies more than one temporal mode");
  }
  const std::size_t n = dec.grid.n_bins;
  r.mode.assign(n, 0.0);
  r.phase.assign(n, 0.0);
  r.phase_defined.assign(n, false);
  if (r.significant == 0) return r;
  r.has_mode = true;
  r.n1 = dec.photon_numbers[0];
  r.n2 = r.significant == 2 ? dec.photon_numbers[1] : 0.0;
  const double a1 = std::sqrt(r.n1);
  const double a2 = std::sqrt(r.n2);
  const double total = std::sqrt(r.n1 + r.n2);
  double peak = 0.0;
  for (std::size_t b = 0; b < n; ++b) {
    const double re = a1 * dec.eigenfunctions[0][b];
    const double im = r.significant == 2 ? a2 * dec.eigenfunctions[1][b] : 0.0;
    r.mode[b] = cplx(re, im) / total;
    peak = std::max(peak, std::abs(r.mode[b]));
  }
  for (std::size_t b = 0; b < n; ++b) {
    if (std::abs(r.mode[b]) <= phase_floor * peak) continue;
    r.phase_defined[b] = true;
    const double re = r.mode[b].real();
    const double im = r.mode[b].imag();
    r.phase[b] = re != 0.0 ? std::atan(im / re) : std::copysign(M_PI / 2.0, im);
  }
  return r;
}

double bin_fidelity(const std::vector<cplx>& a, const std::vector<cplx>& c) {
  require(a.size() == c.size(), ErrorCode::GridMismatch, "bin vectors differ in length");
  cplx o = 0.0;
  double na = 0.0, nc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    o += std::conj(a[i]) * c[i];
    na += std::norm(a[i]);
    nc += std::norm(c[i]);
  }
  require(na > 0.0 && nc > 0.0, ErrorCode::InvalidArgument, "fidelity of a zero vector");
  return std::norm(o) / (na * nc);
}

double branch_fidelity(const ReconstructedMode& rec, const std::vector<cplx>& target) {
  require(rec.has_mode, ErrorCode::InvalidArgument, "no mode was reconstructed");
  return std::max(bin_fidelity(target, rec.bin_vector(false)), bin_fidelity(target, rec.bin_vector(true)));
}

}  // namespace photonshape

namespace photonshape {

std::vector<cplx> restore_chirp(const std::vector<cplx>& bins, const RecordGrid& grid,
                                const TemporalMode& reference, double alpha, double r_floor) {
  validate(grid);
  require(bins.size() == grid.n_bins, ErrorCode::GridMismatch, "bin vector does not match the grid");
  const auto R = reference.remaining_energy();
  std::vector<cplx> out(bins.size());
  for (std::size_t b = 0; b < bins.size(); ++b) {
    const double x = (grid.centre(b) - reference.t0()) / reference.dt();
    double r;
    if (x <= 0.0) {
      r = R.front();
    } else if (x >= static_cast<double>(R.size() - 1)) {
      r = R.back();
    } else {
      const auto j = static_cast<std::size_t>(x);
      const double f = x - static_cast<double>(j);
      r = (1.0 - f) * R[j] + f * R[j + 1];
    }
    out[b] = bins[b] * std::polar(1.0, alpha * std::log(std::max(r, r_floor)));
  }
  return out;
}

double restored_branch_fidelity(const ReconstructedMode& rec, const std::vector<cplx>& target,
                                const TemporalMode& reference, double alpha) {
  require(rec.has_mode, ErrorCode::InvalidArgument, "no mode was reconstructed");
  double best = 0.0;
  for (bool conj : {false, true}) {
    best = std::max(best, bin_fidelity(target, restore_chirp(rec.bin_vector(conj), rec.grid, reference, alpha)));
  }
  return best;
}

}  // namespace photonshape
