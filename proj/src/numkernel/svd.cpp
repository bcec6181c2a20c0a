#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/QR>

#include "qsd/errors.hpp"
#include "qsd/numkernel.hpp"

namespace qsd {

namespace {

constexpr Eigen::Index kMaxDiagnosticSize = 2000;
constexpr int kMaxSweeps = 80;

// One-sided (Hestenes) Jacobi: rotates column pairs of w until all pairs are
// numerically orthogonal. The singular values are then the column norms.
RealVector hestenes_jacobi(ComplexMatrix w) {
  const Eigen::Index cols = w.cols();
  const double tol = std::numeric_limits<double>::epsilon() * std::sqrt(static_cast<double>(w.rows()));
  RealVector sq(cols);

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    for (Eigen::Index j = 0; j < cols; ++j) sq(j) = w.col(j).squaredNorm();
    bool rotated = false;
    for (Eigen::Index p = 0; p + 1 < cols; ++p) {
      for (Eigen::Index q = p + 1; q < cols; ++q) {
        if (sq(p) == 0.0 || sq(q) == 0.0) continue;
        const Complex gamma = w.col(p).dot(w.col(q));
        const double g = std::abs(gamma);
        if (g <= tol * std::sqrt(sq(p) * sq(q))) continue;
        rotated = true;
        // Rotate (w_p, conj(phase) w_q), whose inner product is real.
        const Complex phase = std::conj(gamma / g);
        const double zeta = (sq(q) - sq(p)) / (2.0 * g);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        ComplexVector wp = w.col(p);
        w.col(p) = c * wp - (s * phase) * w.col(q);
        w.col(q) = s * wp + (c * phase) * w.col(q);
        sq(p) -= t * g;
        sq(q) += t * g;
      }
    }
    if (!rotated) break;
  }

  RealVector sigma(cols);
  for (Eigen::Index j = 0; j < cols; ++j) sigma(j) = w.col(j).norm();
  std::sort(sigma.data(), sigma.data() + cols, std::greater<>());
  return sigma;
}

}  // namespace

RealVector singular_values(const ComplexMatrix& a) {
  if (std::min(a.rows(), a.cols()) > kMaxDiagnosticSize)
    throw ConfigurationError("singular_values is a diagnostic for min(rows, cols) <= 2000, got " +
                             std::to_string(std::min(a.rows(), a.cols())));
  if (a.size() == 0) return RealVector();

  // A (or A^H when wide) = Q R Pi; the rows of R are graded, so Jacobi on
  // R^H converges in few sweeps.
  const ComplexMatrix tall = a.rows() >= a.cols() ? ComplexMatrix(a) : ComplexMatrix(a.adjoint());
  Eigen::ColPivHouseholderQR<ComplexMatrix> qr(tall);
  const Eigen::Index k = tall.cols();
  ComplexMatrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  return hestenes_jacobi(r.adjoint());
}

}  // namespace qsd
