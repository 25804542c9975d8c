#include <cmath>
#include <limits>

#include "photonshape/error.hpp"
#include "photonshape/homodyne.hpp"

namespace photonshape {
namespace {

// Polynomial factor of the Fock density; the Gaussian factor φ(x1)φ(x2) is
// common to all n.
double fock_poly(int n, double x1, double x2, double s1, double s2) {
  switch (n) {
    case 0:
      return 1.0;
    case 1:
      return s1 * x1 * x1 + s2 * x2 * x2;
    case 2: {
      const double re = s1 * (x1 * x1 - 1.0) - s2 * (x2 * x2 - 1.0);
      return 0.5 * (re * re + 4.0 * s1 * s2 * x1 * x1 * x2 * x2);
    }
    default:
      fail(ErrorCode::InvalidArgument, "Fock densities are available for n = 0, 1, 2");
  }
}

}  // namespace

double fock_density(int n, double x1, double x2, double s1sq, double s2sq) {
  const double g = std::exp(-0.5 * (x1 * x1 + x2 * x2)) / (2.0 * M_PI);
  return g * fock_poly(n, x1, x2, s1sq, s2sq);
}

PhotonStats photon_stats(const QuadratureRecords& records, const std::vector<cplx>& mode_bins,
                         const PhotonStatsOptions& opts) {
  validate(records.grid);
  require(mode_bins.size() == records.grid.n_bins, ErrorCode::GridMismatch,
          "mode and records use different grids");
  require(records.trials >= 100, ErrorCode::InvalidArgument,
          "photon statistics need at least 100 trials");
  const RealImagDecomposition d = decompose_real_imag(mode_bins, 1.0);
  const double s1 = d.lambda[0] / (d.lambda[0] + d.lambda[1]);
  const double s2 = 1.0 - s1;
  const std::size_t N = records.trials;
  const std::size_t nb = records.grid.n_bins;

  std::vector<std::array<double, 3>> P(N);
  double log_gauss = 0.0;
  for (std::size_t k = 0; k < N; ++k) {
    const double* x = records.trial(k);
    double x1 = 0.0, x2 = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
      x1 += d.e[0][b] * x[b];
      x2 += d.e[1][b] * x[b];
    }
    for (int n = 0; n < 3; ++n) P[k][n] = fock_poly(n, x1, x2, s1, s2);
    log_gauss += -0.5 * (x1 * x1 + x2 * x2) - std::log(2.0 * M_PI);
  }

  PhotonStats st;
  std::array<double, 3> p = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  bool converged = false;
  for (st.iterations = 1; st.iterations <= opts.max_iterations; ++st.iterations) {
    std::array<double, 3> w = {0.0, 0.0, 0.0};
    for (const auto& pk : P) {
      const double m = p[0] * pk[0] + p[1] * pk[1] + p[2] * pk[2];
      for (int n = 0; n < 3; ++n) w[n] += p[n] * pk[n] / m;
    }
    double change = 0.0;
    for (int n = 0; n < 3; ++n) {
      w[n] /= static_cast<double>(N);
      change = std::max(change, std::abs(w[n] - p[n]));
    }
    p = w;
    if (change < opts.tolerance) {
      converged = true;
      break;
    }
  }
  require(converged, ErrorCode::FitFailure, "photon-number likelihood fit did not converge");

  // Fisher information in (p0, p1) with p2 = 1 - p0 - p1.
  double i00 = 0.0, i01 = 0.0, i11 = 0.0, ll = 0.0;
  for (const auto& pk : P) {
    const double m = p[0] * pk[0] + p[1] * pk[1] + p[2] * pk[2];
    const double d0 = (pk[0] - pk[2]) / m;
    const double d1 = (pk[1] - pk[2]) / m;
    i00 += d0 * d0;
    i01 += d0 * d1;
    i11 += d1 * d1;
    ll += std::log(m);
  }
  const double det = i00 * i11 - i01 * i01;
  if (det > 0.0) {
    const double c00 = i11 / det, c11 = i00 / det, c01 = -i01 / det;
    st.sigma = {std::sqrt(c00), std::sqrt(c11), std::sqrt(std::max(0.0, c00 + c11 + 2.0 * c01))};
  } else {
    st.sigma.fill(std::numeric_limits<double>::infinity());
  }
  st.p = p;
  st.log_likelihood = ll + log_gauss;
  return st;
}

PhotonStats photon_stats(const QuadratureRecords& records, const ReconstructedMode& mode,
                         const PhotonStatsOptions& opts) {
  require(mode.has_mode, ErrorCode::InvalidArgument, "photon statistics need a reconstructed mode");
  return photon_stats(records, mode.bin_vector(), opts);
}

}  // namespace photonshape
