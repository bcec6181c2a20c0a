#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "qsd/errors.hpp"
#include "qsd/multitype.hpp"

namespace qsd {

namespace {

constexpr double kNormalizationFloor = 1e-14;
constexpr double kTailDrop = 1e-20;
constexpr double kDegenerateGap = 1e-300;
constexpr Eigen::Index kResidualChunk = 4096;

Complex root_of_unity(Eigen::Index j, Eigen::Index n) {
  return std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n));
}

Radii resolve_radii(const BivariateOffspring& b, std::size_t n, const std::optional<Radii>& radii) {
  require_subcritical(b);
  if (!is_power_of_two(n))
    throw ConfigurationError("number of nodes n = " + std::to_string(n) + " is not a power of two");
  if (!radii) return choose_radii(b);
  validate_radii(b, *radii);
  return *radii;
}

void finalize(QsdGrid& out, const BivariateOffspring& b) {
  out.sum = out.g.sum();
  out.residual = residual_2d(b, out.g);
}

QsdGrid make_grid(const ComplexVector& values, std::size_t n, const Radii& radii, const BivariateOffspring& b) {
  auto [g, leak] = grid_from_values(values, n, radii);
  QsdGrid out;
  out.g = std::move(g);
  out.imag_leak = leak;
  out.n = n;
  out.r1 = radii.r1;
  out.r2 = radii.r2;
  out.rho = b.rho();
  return out;
}

}  // namespace

HadamardCauchyOracle::HadamardCauchyOracle(const BivariateOffspring& b, std::size_t n, const Radii& radii)
    : n_(static_cast<Eigen::Index>(n)) {
  if (n == 0) throw ConfigurationError("number of nodes must be positive");
  validate_radii(b, radii);
  x1_.resize(n_);
  x2_.resize(n_);
  for (Eigen::Index h = 0; h < n_; ++h) {
    x1_(h) = radii.r1 * root_of_unity(h, n_);
    x2_(h) = radii.r2 * root_of_unity(h, n_);
  }
  w1_ = x1_ / static_cast<double>(n_);
  w2_ = x2_ / static_cast<double>(n_);
  y1_.resize(n_ * n_);
  y2_.resize(n_ * n_);
  for (Eigen::Index t = 0; t < n_; ++t)
    for (Eigen::Index s = 0; s < n_; ++s) {
      y1_(s + n_ * t) = b.evaluate(0, x1_(s), x2_(t));
      y2_(s + n_ * t) = b.evaluate(1, x1_(s), x2_(t));
    }
}

Complex HadamardCauchyOracle::entry(Eigen::Index i, Eigen::Index j) const {
  return factor1(i, j % n_) * factor2(i, j / n_);
}

void HadamardCauchyOracle::row(Eigen::Index i, ComplexVector& out) const {
  const ComplexVector a = w1_.array() / (x1_.array() - y1_(i));
  const ComplexVector c = w2_.array() / (x2_.array() - y2_(i));
  out.resize(n_ * n_);
  for (Eigen::Index k = 0; k < n_; ++k) out.segment(k * n_, n_) = a * c(k);
}

void HadamardCauchyOracle::col(Eigen::Index j, ComplexVector& out) const {
  const Eigen::Index h = j % n_;
  const Eigen::Index k = j / n_;
  out = (w1_(h) * w2_(k)) / ((x1_(h) - y1_.array()) * (x2_(k) - y2_.array()));
}

ComplexMatrix assemble_cauchy_2d(const BivariateOffspring& b, std::size_t n, const Radii& radii) {
  const HadamardCauchyOracle oracle(b, n, radii);
  const Eigen::Index size = oracle.rows();
  ComplexMatrix a(size, size);
  ComplexVector column;
  for (Eigen::Index j = 0; j < size; ++j) {
    oracle.col(j, column);
    if (!column.allFinite() || column.cwiseAbs().maxCoeff() > 1.0 / kDegenerateGap)
      throw DegenerateContourError("contour node pair " + std::to_string(j) + " coincides with an image of P");
    a.col(j) = column;
    a(j, j) -= b.rho();
  }
  return a;
}

std::pair<RealMatrix, double> grid_from_values(const ComplexVector& values, std::size_t n, const Radii& radii) {
  const auto side = static_cast<Eigen::Index>(n);
  if (values.size() != side * side) throw ConfigurationError("eigenvector length must be n^2");
  ComplexMatrix v = Eigen::Map<const ComplexMatrix>(values.data(), side, side);
  Eigen::Index top_r = 0, top_c = 0;
  v.cwiseAbs().maxCoeff(&top_r, &top_c);
  const Complex top = v(top_r, top_c);
  if (std::abs(top) > 0.0) v *= std::conj(top) / std::abs(top);

  const ComplexMatrix f = ifft2(v);
  if (std::abs(f(0, 0)) < kNormalizationFloor * f.norm())
    throw NormalizationError("constant coefficient of the bivariate interpolant vanishes (|f_00| = " +
                             std::to_string(std::abs(f(0, 0))) + "); cannot normalize");

  const double log_r1 = std::log(radii.r1);
  const double log_r2 = std::log(radii.r2);
  const Complex t = -1.0 / f(0, 0);
  RealMatrix g = RealMatrix::Zero(side, side);
  double leak = 0.0;
  for (Eigen::Index k = 0; k < side; ++k)
    for (Eigen::Index h = 0; h < side; ++h) {
      if (h == 0 && k == 0) continue;
      const Complex ghk =
          t * f(h, k) * std::exp(-static_cast<double>(h) * log_r1 - static_cast<double>(k) * log_r2);
      g(h, k) = ghk.real();
      leak = std::max(leak, std::abs(ghk.imag()));
    }
  return {std::move(g), leak};
}

double residual_2d(const BivariateOffspring& b, const RealMatrix& g) {
  const Eigen::Index side = g.rows();
  if (g.size() == 0) return std::abs(1.0 - b.rho());
  if (g.cols() != side) throw ConfigurationError("coefficient grid must be square");

  // Trim trailing rows and columns while the dropped mass fits the budget.
  Eigen::Index rows = side, cols = side;
  double dropped = 0.0;
  while (rows > 1 || cols > 1) {
    const double row_mass = rows > 1 ? g.row(rows - 1).head(cols).cwiseAbs().sum() : kTailDrop * 2;
    const double col_mass = cols > 1 ? g.col(cols - 1).head(rows).cwiseAbs().sum() : kTailDrop * 2;
    if (row_mass <= col_mass && dropped + row_mass <= kTailDrop) {
      dropped += row_mass;
      --rows;
    } else if (dropped + col_mass <= kTailDrop) {
      dropped += col_mass;
      --cols;
    } else {
      break;
    }
  }
  const ComplexMatrix gt = g.topLeftCorner(rows, cols).cast<Complex>();

  // G on the unit torus is the unscaled forward transform of g.
  const ComplexMatrix g_torus = fft2(g.cast<Complex>());
  const double rho = b.rho();

  const Eigen::Index points = side * side;
  double worst = 0.0;
  ComplexMatrix ypow(cols, kResidualChunk);
  ComplexVector xs(kResidualChunk);
  for (Eigen::Index start = 0; start < points; start += kResidualChunk) {
    const Eigen::Index len = std::min(kResidualChunk, points - start);
    for (Eigen::Index p = 0; p < len; ++p) {
      const Eigen::Index i = (start + p) % side;
      const Eigen::Index j = (start + p) / side;
      const Complex x = root_of_unity(i, side);
      const Complex y = root_of_unity(j, side);
      xs(p) = b.evaluate(0, x, y);
      const Complex py = b.evaluate(1, x, y);
      Complex power = 1.0;
      for (Eigen::Index k = 0; k < cols; ++k) {
        ypow(k, p) = power;
        power *= py;
      }
    }
    const ComplexMatrix inner = gt * ypow.leftCols(len);  // rows x len
    for (Eigen::Index p = 0; p < len; ++p) {
      Complex acc = 0.0;
      for (Eigen::Index h = rows - 1; h >= 0; --h) acc = acc * xs(p) + inner(h, p);
      const Eigen::Index i = (start + p) % side;
      const Eigen::Index j = (start + p) / side;
      worst = std::max(worst, std::abs(acc - rho * g_torus(i, j) - 1.0 + rho));
    }
  }
  return worst;
}

QsdGrid solve_dense_2d(const BivariateOffspring& b, std::size_t n, std::optional<Radii> radii,
                       const EigenOptions& options) {
  if (n > kMaxDenseNodes2D)
    throw ConfigurationError("dense 2D solver is limited to n <= 128 (got " + std::to_string(n) +
                             "); use the low-rank method");
  const Radii rr = resolve_radii(b, n, radii);
  const Eigenpair eig = smallest_eigenpair(assemble_cauchy_2d(b, n, rr), options);
  QsdGrid out = make_grid(eig.vector, n, rr, b);
  out.method = Method::Dense;
  out.eigen_residual = eig.residual;
  finalize(out, b);
  return out;
}

QsdGrid solve_lowrank_2d(const BivariateOffspring& b, std::size_t n, double tau, std::optional<Radii> radii,
                         int max_rank, const EigenOptions& options) {
  const Radii rr = resolve_radii(b, n, radii);
  LowRankFactors factors = aca(HadamardCauchyOracle(b, n, rr), tau, max_rank);
  const auto eig = eigs_lr(factors.U, factors.V, b.rho(), options);
  factors.U.resize(0, 0);
  factors.V.resize(0, 0);
  QsdGrid out = make_grid(eig.vector, n, rr, b);
  out.method = Method::LowRank;
  out.rank = factors.rank;
  out.rank_truncated = factors.truncated;
  out.eigen_residual = eig.residual;
  finalize(out, b);
  return out;
}

}  // namespace qsd
