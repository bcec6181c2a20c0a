#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "qsd/errors.hpp"
#include "qsd/lowrank.hpp"

namespace qsd {

namespace {

constexpr double kDegeneratePivot = 1e-300;
// Factors grow in fixed column steps. Eigen value-initializes new columns, so
// doubling would commit up to twice the final storage at large N.
constexpr Eigen::Index kGrowthStep = 64;

}  // namespace

void EntryOracle::row(Eigen::Index i, ComplexVector& out) const {
  out.resize(cols());
  for (Eigen::Index j = 0; j < cols(); ++j) out(j) = entry(i, j);
}

void EntryOracle::col(Eigen::Index j, ComplexVector& out) const {
  out.resize(rows());
  for (Eigen::Index i = 0; i < rows(); ++i) out(i) = entry(i, j);
}

CauchyOracle::CauchyOracle(const OffspringGF& gf, const ContourConfig& cfg, bool quadrature_weights) {
  // Any n works here; only the interpolation step needs a power of two.
  validate_radius(gf, cfg.r);
  if (cfg.n == 0) throw ConfigurationError("Cauchy oracle needs at least one node");
  const auto n = static_cast<Eigen::Index>(cfg.n);
  x_.resize(n);
  y_.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    x_(j) = std::polar(cfg.r, 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n));
    y_(j) = gf.evaluate(x_(j));
  }
  w_ = quadrature_weights ? ComplexVector(x_ / static_cast<double>(n)) : ComplexVector::Ones(n);
  // |P(r xi)| <= P(r) < r keeps every gap at least r - P(r).
  const double gap = cfg.r - gf.evaluate(cfg.r);
  if (!(gap > 1e-300)) throw DegenerateContourError("contour nodes touch their images under P");
}

void CauchyOracle::row(Eigen::Index j, ComplexVector& out) const {
  out = w_.array() / (x_.array() - y_(j));
}

void CauchyOracle::col(Eigen::Index h, ComplexVector& out) const {
  out = w_(h) / (x_(h) - y_.array());
}

LowRankFactors aca(const EntryOracle& oracle, double tau, int max_rank) {
  if (!(tau > 0.0)) throw ConfigurationError("ACA threshold tau must be positive");
  const Eigen::Index rows = oracle.rows();
  const Eigen::Index cols = oracle.cols();
  const Eigen::Index full = std::min(rows, cols);
  if (max_rank < 0) max_rank = static_cast<int>(std::min<Eigen::Index>(full, kDefaultMaxRank));
  if (max_rank > full) throw ConfigurationError("ACA max_rank exceeds the matrix dimension");

  LowRankFactors out;
  out.tau = tau;
  Eigen::Index capacity = std::min<Eigen::Index>(kGrowthStep, std::max(max_rank, 1));
  out.U.resize(rows, capacity);
  out.V.resize(cols, capacity);

  std::vector<char> used(static_cast<std::size_t>(rows), 0);
  ComplexVector v, u, coeffs;
  Eigen::Index pivot_row = 0;
  Eigen::Index k = 0;

  while (k < max_rank) {
    used[static_cast<std::size_t>(pivot_row)] = 1;
    oracle.row(pivot_row, v);
    if (k > 0) v.noalias() -= out.V.leftCols(k).conjugate() * out.U.row(pivot_row).head(k).transpose();

    Eigen::Index pivot_col = 0;
    const double pivot_abs = v.cwiseAbs().maxCoeff(&pivot_col);
    if (!(pivot_abs >= kDegeneratePivot)) break;

    oracle.col(pivot_col, u);
    if (k > 0) u.noalias() -= out.U.leftCols(k) * out.V.row(pivot_col).head(k).adjoint();
    u /= v(pivot_col);

    if (k == capacity) {
      capacity = std::min<Eigen::Index>(capacity + kGrowthStep, max_rank);
      out.U.conservativeResize(Eigen::NoChange, capacity);
      out.V.conservativeResize(Eigen::NoChange, capacity);
    }
    out.U.col(k) = u;
    out.V.col(k) = v.conjugate();
    ++k;

    out.last_cross_norm = u.norm() * v.norm();
    if (out.last_cross_norm < tau) break;

    double best = -1.0;
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (used[static_cast<std::size_t>(i)]) continue;
      const double a = std::abs(u(i));
      if (a > best) {
        best = a;
        pivot_row = i;
      }
    }
    if (best < 0.0) break;  // every row used
  }

  out.rank = static_cast<int>(k);
  out.truncated = k == max_rank && !(out.last_cross_norm < tau);
  out.U.conservativeResize(Eigen::NoChange, k);
  out.V.conservativeResize(Eigen::NoChange, k);
  return out;
}

}  // namespace qsd
