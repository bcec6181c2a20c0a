#pragma once

// Two-type processes: bivariate offspring generating functions, the mean
// progeny matrix, and evaluation-interpolation on the torus
// r1 S^1 x r2 S^1.

#include <Eigen/Dense>
#include <array>
#include <cstddef>
#include <optional>
#include <utility>
#include <variant>

#include "qsd/dense_solver.hpp"
#include "qsd/lowrank.hpp"
#include "qsd/numkernel.hpp"

namespace qsd {

/// P_1 and P_2 as coefficient grids: p1(h, k) is the probability that a
/// type-1 parent has h type-1 and k type-2 children.
struct Polynomial2D {
  RealMatrix p1;
  RealMatrix p2;
};

/// P_j(x, y) = (S_j1 x + S_j2 y + b_j) / (c_1 x + c_2 y + d).
struct LinearFractional2D {
  Eigen::Matrix2d S;
  Eigen::Vector2d c;
  Eigen::Vector2d b;
  double d = 1.0;
};

class BivariateOffspring {
 public:
  using Family = std::variant<Polynomial2D, LinearFractional2D>;

  /// Grids must be nonnegative and sum to 1 within 1e-12.
  static BivariateOffspring polynomial(RealMatrix p1, RealMatrix p2);

  /// Requires d > 0, c <= 0, S >= 0, b >= 0 (so both laws have nonnegative
  /// coefficients) and P_j(1, 1) = 1 within 1e-12.
  static BivariateOffspring linear_fractional(const Eigen::Matrix2d& S, const Eigen::Vector2d& c,
                                              const Eigen::Vector2d& b, double d);

  /// P_j(x, y) for j = 0 (type 1) or 1 (type 2).
  Complex evaluate(int j, Complex x, Complex y) const;
  double evaluate(int j, double x, double y) const;

  /// Coefficients of P_j(x, x) as a single-type law.
  OffspringGF diagonal(int j) const;

  const Eigen::Matrix2d& mean_matrix() const noexcept { return M_; }
  double rho() const noexcept { return rho_; }
  const Family& family() const noexcept { return family_; }

 private:
  explicit BivariateOffspring(Family family);

  Family family_;
  Eigen::Matrix2d M_;
  double rho_ = 0.0;
};

struct MeanMatrix {
  Eigen::Matrix2d M;
  double rho = 0.0;
};

/// M_{ji} = dP_j/dx_i at (1, 1) and its Perron root. Throws ModelError if M
/// has a negative entry, or when require_regular is set and M^2 is not
/// strictly positive.
MeanMatrix mean_matrix_and_rho(const BivariateOffspring::Family& family, bool require_regular = true);

/// Throws UnsupportedRegimeError unless rho < 1.
void require_subcritical(const BivariateOffspring& b);

struct Radii {
  double r1 = 0.0;
  double r2 = 0.0;
};

/// Throws ConfigurationError unless r_j > 1 and |P_j| < r_j on a 64 x 64
/// sample of the torus r1 S^1 x r2 S^1 (and the linear-fractional
/// denominator stays away from zero on the closed polydisc).
void validate_radii(const BivariateOffspring& b, const Radii& radii);

/// Per-type argmin over x >= 1 of P_j(x, x) - x. The two minimizers are
/// assigned to the types in the first order that passes validate_radii.
Radii choose_radii(const BivariateOffspring& b);

/// Bivariate coefficients g(h, k) of the quasi-stationary generating function,
/// with g(0, 0) = 0, plus run diagnostics.
struct QsdGrid {
  RealMatrix g;
  std::size_t n = 0;
  double r1 = 0.0;
  double r2 = 0.0;
  double rho = 0.0;
  double residual = 0.0;
  double sum = 0.0;
  double imag_leak = 0.0;
  Method method = Method::Dense;
  int rank = 0;
  bool rank_truncated = false;
  double eigen_residual = 0.0;
};

/// Dense 2D limit: the matrix has n^2 rows.
inline constexpr std::size_t kMaxDenseNodes2D = 128;

/// Entry (s + n t, h + n k) of C D:
/// w_h w_k / ((r1 xi_h - P_1(r1 xi_s, r2 xi_t)) (r2 xi_k - P_2(r1 xi_s, r2 xi_t)))
/// with w_h = r1 xi_h / n and w_k = r2 xi_k / n. Each row is an outer product.
class HadamardCauchyOracle final : public EntryOracle {
 public:
  HadamardCauchyOracle(const BivariateOffspring& b, std::size_t n, const Radii& radii);

  Eigen::Index rows() const override { return y1_.size(); }
  Eigen::Index cols() const override { return y1_.size(); }
  Complex entry(Eigen::Index i, Eigen::Index j) const override;
  void row(Eigen::Index i, ComplexVector& out) const override;
  void col(Eigen::Index j, ComplexVector& out) const override;

  /// 1D factor entries: w_h / (r1 xi_h - P_1) at row i, and the type-2 one.
  Complex factor1(Eigen::Index i, Eigen::Index h) const { return w1_(h) / (x1_(h) - y1_(i)); }
  Complex factor2(Eigen::Index i, Eigen::Index k) const { return w2_(k) / (x2_(k) - y2_(i)); }

 private:
  Eigen::Index n_;
  ComplexVector x1_, x2_, w1_, w2_;
  ComplexVector y1_, y2_;  // P_1, P_2 at grid point s + n t
};

/// Full n^2 x n^2 matrix C D - rho I.
ComplexMatrix assemble_cauchy_2d(const BivariateOffspring& b, std::size_t n, const Radii& radii);

/// Eigenvector values at (r1 xi_h, r2 xi_k), stored at h + n k -> normalized
/// coefficients via gauge fix, 2D inverse FFT, r1^-h r2^-k rescaling and
/// division by -f_00. Throws NormalizationError when |f_00| < 1e-14 ||f||.
std::pair<RealMatrix, double> grid_from_values(const ComplexVector& values, std::size_t n, const Radii& radii);

/// max over the n x n unit torus of |G(P_1, P_2) - rho G - 1 + rho|, n the
/// grid side. Trailing rows and columns whose absolute sum is below 1e-20 are
/// skipped.
double residual_2d(const BivariateOffspring& b, const RealMatrix& g);

QsdGrid solve_dense_2d(const BivariateOffspring& b, std::size_t n, std::optional<Radii> radii = std::nullopt,
                       const EigenOptions& options = {});

QsdGrid solve_lowrank_2d(const BivariateOffspring& b, std::size_t n, double tau = kDefaultTau,
                         std::optional<Radii> radii = std::nullopt, int max_rank = -1,
                         const EigenOptions& options = {});

}  // namespace qsd
