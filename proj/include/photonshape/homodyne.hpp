#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "photonshape/temporal_mode.hpp"

namespace photonshape {

// Homodyne record grid: n_bins bins of equal width starting at t_start (µs).
// Each record entry is the bin-integrated quadrature divided by √bin_width,
// so vacuum variance per bin is 1.
struct RecordGrid {
  double t_start = 0.0;
  double bin_width = 0.0;
  std::size_t n_bins = 0;

  double centre(std::size_t b) const { return t_start + (static_cast<double>(b) + 0.5) * bin_width; }
};

void validate(const RecordGrid& grid);

// Dense row-major real matrix.
struct RealMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> v;

  RealMatrix() = default;
  RealMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), v(r * c, 0.0) {}
  static RealMatrix identity(std::size_t n);
  double& operator()(std::size_t i, std::size_t j) { return v[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return v[i * cols + j]; }
  double symmetry_residual() const;
};

struct QuadratureRecords {
  RecordGrid grid;
  std::size_t trials = 0;
  std::vector<double> data;  // trials × n_bins, row-major

  const double* trial(std::size_t k) const { return data.data() + k * grid.n_bins; }
};

// Mode amplitude per bin, u_b = √w·(mean of f over bin b), renormalized so
// Σ|u_b|² = 1. Bins without samples use the interpolated centre value.
std::vector<cplx> bin_mode(const TemporalMode& mode, const RecordGrid& grid);

// Real second-moment content of √p1·u: Re(u)Re(u)ᵀ + Im(u)Im(u)ᵀ = Σ λ_i e_i e_iᵀ
// with e_i orthonormal (Euclidean) and λ_1 >= λ_2 the Gram-matrix eigenvalues.
// n_i = p1·λ_i. Up to a global phase u = √λ_1 e_1 + i√λ_2 e_2.
struct RealImagDecomposition {
  std::array<double, 2> lambda{};
  std::array<double, 2> n{};
  std::array<std::vector<double>, 2> e;
};

RealImagDecomposition decompose_real_imag(const std::vector<cplx>& u, double p1);

// I + 2 Σ n_i e_i e_iᵀ.
RealMatrix analytic_covariance(const RealImagDecomposition& d, std::size_t n_bins);

enum class RecordGenerator {
  Gaussian,     // exact second moments
  FockMixture,  // with probability p1 a one-photon Fock state in the mode, else vacuum
};

struct SynthOptions {
  RecordGenerator generator = RecordGenerator::Gaussian;
  int threads = 1;
};

// Trial k draws from mt19937_64 seeded by seed_seq(seed, k), so records do
// not depend on the worker count.
QuadratureRecords synth_records(const TemporalMode& mode, double p1, std::size_t trials,
                                const RecordGrid& grid, std::uint64_t seed,
                                const SynthOptions& opts = {});

// Unbiased sample second moment (divisor trials - 1 when the mean is
// subtracted, trials otherwise).
RealMatrix autocorrelation(const QuadratureRecords& records, bool subtract_mean = false);

struct EigenSystem {
  std::vector<double> values;                // descending
  std::vector<std::vector<double>> vectors;  // unit Euclidean norm, largest component positive
  int sweeps = 0;
  double off_diagonal = 0.0;  // final off-diagonal Frobenius norm
};

// Cyclic Jacobi; converged when off(A) <= tol·||A||_F.
EigenSystem jacobi_eigen(const RealMatrix& a, double tol = 1e-10, int max_sweeps = 100);

struct ModeDecomposition {
  RecordGrid grid;
  std::size_t trials = 0;  // 0 for analytic input
  std::vector<double> eigenvalues;
  std::vector<std::vector<double>> eigenfunctions;  // Σ f_i f_j·w = δ_ij
  std::vector<double> photon_numbers;               // (κ - 1)/2
};

// Eigenpairs of V^{-1/2}·C·V^{-1/2}.
ModeDecomposition decompose(const RealMatrix& corr, const RealMatrix& vacuum_ref,
                            const RecordGrid& grid, std::size_t trials);

// 5/√trials plus the Marchenko-Pastur upper-edge excess 2√(n/N) + n/N of a
// pure-vacuum sample covariance.
double significance_threshold(std::size_t trials, std::size_t n_bins);

struct ReconstructedMode {
  RecordGrid grid;
  bool has_mode = false;
  std::size_t significant = 0;
  double threshold = 0.0;
  double n1 = 0.0;
  double n2 = 0.0;
  std::vector<cplx> mode;     // Σ|f_b|²·w = 1
  std::vector<double> phase;  // arctan(√n2 f2 / √n1 f1); the conjugate branch has -φ
  std::vector<bool> phase_defined;

  // Euclidean unit vector on the bins (mode·√w); conjugate = true selects -φ.
  std::vector<cplx> bin_vector(bool conjugate = false) const;
};

// threshold <= 0 selects significance_threshold(trials, n_bins); analytic
// decompositions (trials = 0) use 1e-9.
ReconstructedMode reconstruct_mode(const ModeDecomposition& dec, double threshold = 0.0,
                                   double phase_floor = 0.05);

// |Σ conj(a_b) c_b|² for Euclidean-normalized bin vectors.
double bin_fidelity(const std::vector<cplx>& a, const std::vector<cplx>& c);
// Max over the two phase-sign branches of the reconstruction.
double branch_fidelity(const ReconstructedMode& rec, const std::vector<cplx>& target);

// Multiplies bin b by exp(i·alpha·ln R(t_b)), R the reference's remaining
// energy linearly interpolated at the bin centre and floored at r_floor.
std::vector<cplx> restore_chirp(const std::vector<cplx>& bins, const RecordGrid& grid,
                                const TemporalMode& reference, double alpha, double r_floor = 1e-12);

// Branch-maximized fidelity after restore_chirp on each branch.
double restored_branch_fidelity(const ReconstructedMode& rec, const std::vector<cplx>& target,
                                const TemporalMode& reference, double alpha);

struct PhotonStats {
  std::array<double, 3> p{};
  std::array<double, 3> sigma{};
  int iterations = 0;
  double log_likelihood = 0.0;
};

struct PhotonStatsOptions {
  double tolerance = 1e-10;
  int max_iterations = 20000;
};

// Each trial gives the quadratures (x1, x2) along the orthonormal real and
// imaginary directions of the mode; p0..p2 maximize the likelihood under the
// joint densities of Fock states 0, 1, 2 in that mode. Errors from the
// inverse Fisher matrix.
PhotonStats photon_stats(const QuadratureRecords& records, const std::vector<cplx>& mode_bins,
                         const PhotonStatsOptions& opts = {});
PhotonStats photon_stats(const QuadratureRecords& records, const ReconstructedMode& mode,
                         const PhotonStatsOptions& opts = {});

// Joint quadrature density of |n> in the mode σ1·e1 + iσ2·e2 (σ1² + σ2² = 1).
double fock_density(int n, double x1, double x2, double s1sq, double s2sq);

}  // namespace photonshape
