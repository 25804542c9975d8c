#include <algorithm>
#include <cmath>
#include <numeric>

#include "photonshape/error.hpp"
#include "photonshape/homodyne.hpp"

namespace photonshape {

RealMatrix RealMatrix::identity(std::size_t n) {
  RealMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

double RealMatrix::symmetry_residual() const {
  double r = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = i + 1; j < cols; ++j) r = std::max(r, std::abs((*this)(i, j) - (*this)(j, i)));
  }
  return r;
}

EigenSystem jacobi_eigen(const RealMatrix& input, double tol, int max_sweeps) {
  require(input.rows == input.cols && input.rows > 0, ErrorCode::InvalidArgument,
          "eigensolver needs a non-empty square matrix");
  const std::size_t n = input.rows;
  RealMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a(i, j) = 0.5 * (input(i, j) + input(j, i));
  }
  RealMatrix v = RealMatrix::identity(n);
  double frob = 0.0;
  for (double x : a.v) frob += x * x;
  frob = std::sqrt(frob);

  const auto off = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i != j) s += a(i, j) * a(i, j);
      }
    }
    return std::sqrt(s);
  };

  EigenSystem out;
  double off_norm = off();
  while (off_norm > tol * frob) {
    require(out.sweeps < max_sweeps, ErrorCode::FitFailure, "Jacobi eigensolver did not converge");
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
    ++out.sweeps;
    off_norm = off();
  }
  out.off_diagonal = off_norm;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });
  for (std::size_t i : order) {
    out.values.push_back(a(i, i));
    std::vector<double> col(n);
    std::size_t big = 0;
    for (std::size_t k = 0; k < n; ++k) {
      col[k] = v(k, i);
      if (std::abs(col[k]) > std::abs(col[big]) + 1e-12) big = k;
    }
    if (col[big] < 0.0) {
      for (double& x : col) x = -x;
    }
    out.vectors.push_back(std::move(col));
  }
  return out;
}

}  // namespace photonshape
