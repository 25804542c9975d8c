#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "photonshape/error.hpp"
#include "photonshape/homodyne.hpp"
#include "photonshape/temporal_mode.hpp"

using namespace photonshape;

namespace {

const RecordGrid kGrid{-1.25, 0.125, 20};

TemporalMode sech_mode(double T, double chirp = 0.0) {
  ShapeSpec s;
  s.characteristic = T;
  s.t_min = -5.0 * T;
  s.t_max = 5.0 * T;
  s.n_samples = 2000;
  const TemporalMode m = make_shape(s);
  if (chirp == 0.0) return m;
  // Same log-R phase as an uncompensated emission.
  return apply_log_phase(m, m, chirp);
}

RealMatrix from_eigen(const Eigen::MatrixXd& m) {
  RealMatrix r(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) r(i, j) = m(i, j);
  return r;
}

Eigen::MatrixXd to_eigen(const RealMatrix& m) {
  Eigen::MatrixXd r(m.rows, m.cols);
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) r(i, j) = m(i, j);
  return r;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

}  // namespace

TEST_CASE("Jacobi agrees with a reference symmetric eigensolver") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> nd;
  for (int n : {1, 2, 5, 12, 30}) {
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = nd(rng);
    a = (a + a.transpose()).eval();
    const EigenSystem js = jacobi_eigen(from_eigen(a));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    const double scale = a.norm();
    CAPTURE(n);
    for (int k = 0; k < n; ++k) {
      const double ref = es.eigenvalues()(n - 1 - k);
      CHECK(std::abs(js.values[k] - ref) < 1e-9 * scale);
      if (k > 0) CHECK(js.values[k] <= js.values[k - 1]);
      const Eigen::VectorXd rv = es.eigenvectors().col(n - 1 - k);
      double d = 0.0, norm = 0.0, big = 0.0;
      for (int i = 0; i < n; ++i) {
        d += rv(i) * js.vectors[k][i];
        norm += js.vectors[k][i] * js.vectors[k][i];
        if (std::abs(js.vectors[k][i]) > std::abs(big)) big = js.vectors[k][i];
      }
      CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(std::abs(std::abs(d) - 1.0) < 1e-8);
      CHECK(big > 0.0);
    }
    CHECK(js.off_diagonal <= 1e-10 * scale);
  }
}

TEST_CASE("real/imaginary decomposition of a complex mode") {
  const std::vector<cplx> u = bin_mode(sech_mode(0.5, 0.9), kGrid);
  double un = 0.0;
  for (const auto& x : u) un += std::norm(x);
  CHECK(un == doctest::Approx(1.0).epsilon(1e-12));
  const RealImagDecomposition d = decompose_real_imag(u, 0.3);
  // Oracle: eigenvalues of the 2x2 Gram matrix of (Re u, Im u).
  Eigen::Matrix2d g = Eigen::Matrix2d::Zero();
  for (const auto& x : u) {
    g(0, 0) += x.real() * x.real();
    g(1, 1) += x.imag() * x.imag();
    g(0, 1) += x.real() * x.imag();
  }
  g(1, 0) = g(0, 1);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(g);
  CHECK(d.lambda[0] == doctest::Approx(es.eigenvalues()(1)).epsilon(1e-12));
  CHECK(d.lambda[1] == doctest::Approx(es.eigenvalues()(0)).epsilon(1e-10));
  CHECK(d.lambda[1] > 0.01);
  CHECK(d.n[0] + d.n[1] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(dot(d.e[0], d.e[0]) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(dot(d.e[0], d.e[1])) < 1e-12);
  for (std::size_t i = 0; i < u.size(); ++i) {
    for (std::size_t j = 0; j < u.size(); ++j) {
      const double lhs = u[i].real() * u[j].real() + u[i].imag() * u[j].imag();
      const double rhs = d.lambda[0] * d.e[0][i] * d.e[0][j] + d.lambda[1] * d.e[1][i] * d.e[1][j];
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12).scale(1.0));
    }
  }
  // A real mode has no second component.
  const RealImagDecomposition r = decompose_real_imag(bin_mode(sech_mode(0.5), kGrid), 0.3);
  CHECK(r.n[1] == doctest::Approx(0.0).scale(1.0));
  CHECK(r.n[0] == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("decomposition of analytic covariances") {
  const std::size_t n = kGrid.n_bins;
  const RealMatrix I = RealMatrix::identity(n);
  const ModeDecomposition id = decompose(I, I, kGrid, 0);
  for (double k : id.eigenvalues) CHECK(k == doctest::Approx(1.0).epsilon(1e-12));

  // I + 0.6 f fᵀ with f a Euclidean unit vector.
  const std::vector<cplx> u = bin_mode(sech_mode(0.5), kGrid);
  RealMatrix c = I;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) c(i, j) += 0.6 * u[i].real() * u[j].real();
  const ModeDecomposition one = decompose(c, I, kGrid, 0);
  CHECK(one.eigenvalues[0] == doctest::Approx(1.6).epsilon(1e-12));
  CHECK(one.photon_numbers[0] == doctest::Approx(0.3).epsilon(1e-12));
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) d += one.eigenfunctions[0][i] * std::sqrt(kGrid.bin_width) * u[i].real();
  CHECK(std::abs(d) == doctest::Approx(1.0).epsilon(1e-12));

  // Two-mode case recovers the injected photon numbers and functions.
  const std::vector<cplx> uc = bin_mode(sech_mode(0.5, 0.9), kGrid);
  const RealImagDecomposition rd = decompose_real_imag(uc, 0.284);
  const ModeDecomposition two = decompose(analytic_covariance(rd, n), I, kGrid, 0);
  CHECK(std::abs(two.photon_numbers[0] - rd.n[0]) < 1e-9);
  CHECK(std::abs(two.photon_numbers[1] - rd.n[1]) < 1e-9);
  for (std::size_t k = 2; k < n; ++k) CHECK(std::abs(two.photon_numbers[k]) < 1e-9);
  for (int k = 0; k < 2; ++k) {
    double o = 0.0;
    for (std::size_t i = 0; i < n; ++i) o += two.eigenfunctions[k][i] * std::sqrt(kGrid.bin_width) * rd.e[k][i];
    CHECK(std::abs(std::abs(o) - 1.0) < 1e-9);
  }
  // Orthonormality under the bin-width weight.
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      CHECK(dot(two.eigenfunctions[a], two.eigenfunctions[b]) * kGrid.bin_width ==
            doctest::Approx(a == b ? 1.0 : 0.0).scale(1.0).epsilon(1e-9));
    }
  }
  // Trace sum rule.
  double tr = 0.0;
  for (double k : two.eigenvalues) tr += k;
  CHECK(tr == doctest::Approx(n + 2.0 * 0.284).epsilon(1e-12));

  RealMatrix bad = I;
  bad(0, 1) = 0.5;
  CHECK_THROWS_AS(decompose(bad, I, kGrid, 0), Error);
}

TEST_CASE("vacuum normalization uses the reference covariance") {
  const std::size_t n = kGrid.n_bins;
  RealMatrix v = RealMatrix::identity(n);
  for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0 + 0.05 * static_cast<double>(i);
  const ModeDecomposition d = decompose(v, v, kGrid, 0);
  for (double k : d.eigenvalues) CHECK(k == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("reconstruction of single- and two-mode signals") {
  const std::size_t n = kGrid.n_bins;
  const RealMatrix I = RealMatrix::identity(n);
  const std::vector<cplx> ur = bin_mode(sech_mode(0.5), kGrid);
  const ReconstructedMode real = reconstruct_mode(decompose(analytic_covariance(decompose_real_imag(ur, 0.3), n), I, kGrid, 0));
  CHECK(real.has_mode);
  CHECK(real.significant == 1);
  CHECK(real.n2 == 0.0);
  double norm = 0.0;
  for (std::size_t b = 0; b < n; ++b) {
    CHECK(real.mode[b].imag() == 0.0);
    CHECK(real.phase[b] == 0.0);
    norm += std::norm(real.mode[b]) * kGrid.bin_width;
  }
  CHECK(norm == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(bin_fidelity(real.bin_vector(), ur) == doctest::Approx(1.0).epsilon(1e-12));

  const std::vector<cplx> uc = bin_mode(sech_mode(0.5, 0.9), kGrid);
  const ReconstructedMode two = reconstruct_mode(decompose(analytic_covariance(decompose_real_imag(uc, 0.284), n), I, kGrid, 0));
  CHECK(two.significant == 2);
  CHECK(two.n1 + two.n2 == doctest::Approx(0.284).epsilon(1e-9));
  CHECK(branch_fidelity(two, uc) == doctest::Approx(1.0).epsilon(1e-9));
  // The other branch is the complex conjugate.
  const auto a = two.bin_vector(false), b = two.bin_vector(true);
  for (std::size_t k = 0; k < n; ++k) CHECK(std::abs(a[k] - std::conj(b[k])) < 1e-12);

  // Three orthogonal modes are not a single photon.
  RealMatrix c = I;
  for (std::size_t m = 0; m < 3; ++m) c(m * 3, m * 3) += 0.6;
  try {
    reconstruct_mode(decompose(c, I, kGrid, 0));
    FAIL("three-mode signal accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MultimodeSignal);
  }
  CHECK_FALSE(reconstruct_mode(decompose(I, I, kGrid, 0)).has_mode);
}

TEST_CASE("significance threshold") {
  CHECK(significance_threshold(10000, 20) ==
        doctest::Approx(0.05 + 2.0 * std::sqrt(0.002) + 0.002).epsilon(1e-14));
  CHECK(significance_threshold(100000, 20) < significance_threshold(10000, 20));
  CHECK_THROWS_AS(significance_threshold(0, 20), Error);
}

TEST_CASE("record synthesis is reproducible and thread independent") {
  const TemporalMode m = sech_mode(0.5, 0.9);
  for (RecordGenerator g : {RecordGenerator::Gaussian, RecordGenerator::FockMixture}) {
    SynthOptions o1{g, 1}, o4{g, 4};
    const QuadratureRecords a = synth_records(m, 0.284, 3000, kGrid, 42, o1);
    const QuadratureRecords b = synth_records(m, 0.284, 3000, kGrid, 42, o4);
    const QuadratureRecords c = synth_records(m, 0.284, 3000, kGrid, 43, o1);
    CHECK(a.data == b.data);
    CHECK(a.data != c.data);
    CHECK(a.trials == 3000);
    CHECK(a.data.size() == 3000 * kGrid.n_bins);
  }
  CHECK_THROWS_AS(synth_records(m, 1.5, 100, kGrid, 1), Error);
  CHECK_THROWS_AS(synth_records(m, 0.3, 100, RecordGrid{0.0, 0.0, 20}, 1), Error);
  CHECK_THROWS_AS(synth_records(m, 0.3, 100, RecordGrid{0.0, 0.1, 0}, 1), Error);
}

TEST_CASE("autocorrelation") {
  QuadratureRecords one;
  one.grid = RecordGrid{0.0, 0.1, 4};
  one.trials = 2;
  one.data = {1.0, -2.0, 0.5, 3.0, 1.0, -2.0, 0.5, 3.0};
  const RealMatrix c = autocorrelation(one);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) CHECK(c(i, j) == doctest::Approx(one.data[i] * one.data[j]));
  const RealMatrix cm = autocorrelation(one, true);
  for (double x : cm.v) CHECK(x == doctest::Approx(0.0).scale(1.0));

  // Sampled covariance converges to the analytic one entry by entry.
  const std::size_t N = 40000;
  const TemporalMode m = sech_mode(0.5, 0.9);
  const QuadratureRecords r = synth_records(m, 0.284, N, kGrid, 7);
  const RealMatrix s = autocorrelation(r);
  const RealMatrix a = analytic_covariance(decompose_real_imag(bin_mode(m, kGrid), 0.284), kGrid.n_bins);
  for (std::size_t i = 0; i < kGrid.n_bins; ++i) {
    for (std::size_t j = 0; j < kGrid.n_bins; ++j) {
      const double sd = std::sqrt((a(i, i) * a(j, j) + a(i, j) * a(i, j)) / N);
      CHECK(std::abs(s(i, j) - a(i, j)) < 5.0 * sd);
    }
  }
  CHECK(s.symmetry_residual() == 0.0);
}

TEST_CASE("vacuum records have unit eigenvalues up to sampling noise") {
  const std::size_t N = 10000;
  const QuadratureRecords v = synth_records(sech_mode(0.5), 0.0, N, kGrid, 11);
  const RealMatrix I = RealMatrix::identity(kGrid.n_bins);
  const ModeDecomposition d = decompose(autocorrelation(v), I, kGrid, N);
  const double edge = significance_threshold(N, kGrid.n_bins);
  for (double k : d.eigenvalues) CHECK(std::abs(k - 1.0) < edge);
  CHECK_FALSE(reconstruct_mode(d).has_mode);
  double tr = 0.0;
  for (double k : d.eigenvalues) tr += k;
  CHECK(tr == doctest::Approx(kGrid.n_bins).epsilon(5.0 * std::sqrt(2.0 / (N * kGrid.n_bins))));
}

TEST_CASE("chirped-mode pipeline on synthetic records") {
  const std::size_t N = 20000;
  const TemporalMode m = sech_mode(0.5, 0.9);
  const std::vector<cplx> u = bin_mode(m, kGrid);
  const RealMatrix I = RealMatrix::identity(kGrid.n_bins);
  const QuadratureRecords r = synth_records(m, 0.284, N, kGrid, 2024);
  const ModeDecomposition d = decompose(autocorrelation(r), I, kGrid, N);
  const ReconstructedMode rec = reconstruct_mode(d);
  CHECK(rec.significant == 2);
  CHECK(rec.n1 + rec.n2 == doctest::Approx(0.284).epsilon(0.1));
  CHECK(branch_fidelity(rec, u) >= 0.95);
  double norm = 0.0;
  for (const auto& x : rec.mode) norm += std::norm(x) * kGrid.bin_width;
  CHECK(norm == doctest::Approx(1.0).epsilon(1e-9));
  // Removing the known chirp yields the real sech on one of the branches.
  const std::vector<cplx> plain = bin_mode(sech_mode(0.5), kGrid);
  CHECK(restored_branch_fidelity(rec, plain, sech_mode(0.5), -0.9) >= 0.95);
  double sum = 0.0;
  for (double k : d.eigenvalues) sum += k;
  CHECK(sum == doctest::Approx(kGrid.n_bins + 2.0 * 0.284).epsilon(0.01));
}

TEST_CASE("reconstruction improves with more trials") {
  const TemporalMode m = sech_mode(0.5, 0.9);
  const std::vector<cplx> u = bin_mode(m, kGrid);
  const RealMatrix I = RealMatrix::identity(kGrid.n_bins);
  std::vector<double> medians;
  for (std::size_t N : {1000u, 10000u, 100000u}) {
    std::vector<double> f;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const QuadratureRecords r = synth_records(m, 0.284, N, kGrid, 1000 + seed);
      try {
        const ReconstructedMode rec = reconstruct_mode(decompose(autocorrelation(r), I, kGrid, N));
        f.push_back(rec.has_mode ? branch_fidelity(rec, u) : 0.0);
      } catch (const Error&) {
        f.push_back(0.0);
      }
    }
    medians.push_back(median(f));
  }
  CHECK(medians[1] > medians[0]);
  CHECK(medians[2] > medians[1]);
  CHECK(medians[2] > 0.99);
}

TEST_CASE("Fock quadrature densities are normalized") {
  for (int n = 0; n <= 2; ++n) {
    for (double s1 : {1.0, 0.7, 0.5}) {
      double acc = 0.0;
      const double h = 0.02;
      for (double x1 = -8.0; x1 <= 8.0; x1 += h)
        for (double x2 = -8.0; x2 <= 8.0; x2 += h) acc += fock_density(n, x1, x2, s1, 1.0 - s1) * h * h;
      CHECK(acc == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
  CHECK_THROWS_AS(fock_density(3, 0.0, 0.0, 1.0, 0.0), Error);
}

TEST_CASE("photon statistics") {
  const TemporalMode m = sech_mode(0.5, 0.9);
  const std::vector<cplx> u = bin_mode(m, kGrid);
  const SynthOptions mix{RecordGenerator::FockMixture, 4};

  const PhotonStats vac = photon_stats(synth_records(m, 0.0, 20000, kGrid, 5, mix), u);
  CHECK(vac.p[0] == doctest::Approx(1.0).epsilon(0.01));

  const PhotonStats s = photon_stats(synth_records(m, 0.284, 100000, kGrid, 6, mix), u);
  CHECK(s.p[1] == doctest::Approx(0.284).epsilon(0.02 / 0.284));
  CHECK(s.p[0] + s.p[1] + s.p[2] == doctest::Approx(1.0).epsilon(1e-6));
  for (int k = 0; k < 3; ++k) {
    CHECK(s.p[k] >= 0.0);
    CHECK(s.p[k] <= 1.0);
    CHECK(s.sigma[k] >= 0.0);
  }
  CHECK(s.sigma[1] < 0.02);

  // Same analytic mode on a finer record grid.
  const RecordGrid fine{-1.25, 0.0625, 40};
  const PhotonStats f = photon_stats(synth_records(m, 0.284, 100000, fine, 6, mix), bin_mode(m, fine));
  CHECK(f.p[1] == doctest::Approx(s.p[1]).epsilon(0.01 / s.p[1]));

  QuadratureRecords few = synth_records(m, 0.3, 50, kGrid, 1, mix);
  CHECK_THROWS_AS(photon_stats(few, u), Error);
  CHECK_THROWS_AS(photon_stats(synth_records(m, 0.3, 200, fine, 1, mix), u), Error);
}
