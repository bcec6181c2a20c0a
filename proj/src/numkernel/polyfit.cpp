#include <cmath>
#include <limits>
#include <string>

#include <Eigen/QR>

#include "qsd/errors.hpp"
#include "qsd/numkernel.hpp"

namespace qsd {

namespace {

// Same threshold MATLAB's polyfit warns at.
constexpr double kIllConditioned = 1e10;

}  // namespace

PolyFit polyfit_real(std::span<const double> xs, std::span<const double> ys, int degree) {
  if (degree < 0) throw ConfigurationError("polyfit degree must be non-negative");
  if (xs.size() != ys.size()) throw ConfigurationError("polyfit: xs and ys differ in length");
  const auto cols = static_cast<Eigen::Index>(degree) + 1;
  const auto rows = static_cast<Eigen::Index>(xs.size());
  if (rows < cols)
    throw ConfigurationError("polyfit needs at least degree+1 = " + std::to_string(cols) + " points, got " +
                             std::to_string(rows));

  RealMatrix vandermonde(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    double power = 1.0;
    for (Eigen::Index j = 0; j < cols; ++j) {
      vandermonde(i, j) = power;
      power *= xs[static_cast<std::size_t>(i)];
    }
  }
  const RealVector rhs = Eigen::Map<const RealVector>(ys.data(), rows);

  Eigen::HouseholderQR<RealMatrix> qr(vandermonde);
  PolyFit fit;
  fit.coefficients = qr.solve(rhs);

  const RealMatrix r = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
  const RealVector sigma = singular_values(r.cast<Complex>());
  const double smallest = sigma(sigma.size() - 1);
  fit.condition = smallest > 0.0 ? sigma(0) / smallest : std::numeric_limits<double>::infinity();
  fit.ill_conditioned = !(fit.condition <= kIllConditioned) || !fit.coefficients.allFinite();
  return fit;
}

}  // namespace qsd
