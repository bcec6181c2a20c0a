#pragma once

// Low-rank path: adaptive cross approximation of the Cauchy factor, the
// reduced k x k eigenproblem, and singular-value decay bounds.

#include <cstddef>
#include <limits>

#include "qsd/dense_solver.hpp"
#include "qsd/genfun.hpp"
#include "qsd/numkernel.hpp"

namespace qsd {

/// Entry access to a matrix that is never formed. Implementations must be
/// pure: the same (i, j) always gives the same value.
class EntryOracle {
 public:
  virtual ~EntryOracle() = default;

  virtual Eigen::Index rows() const = 0;
  virtual Eigen::Index cols() const = 0;
  virtual Complex entry(Eigen::Index i, Eigen::Index j) const = 0;

  /// Row i as a column vector of length cols(); column j of length rows().
  virtual void row(Eigen::Index i, ComplexVector& out) const;
  virtual void col(Eigen::Index j, ComplexVector& out) const;
};

/// Wraps an explicit matrix.
class DenseOracle final : public EntryOracle {
 public:
  explicit DenseOracle(ComplexMatrix a) : a_(std::move(a)) {}

  Eigen::Index rows() const override { return a_.rows(); }
  Eigen::Index cols() const override { return a_.cols(); }
  Complex entry(Eigen::Index i, Eigen::Index j) const override { return a_(i, j); }

 private:
  ComplexMatrix a_;
};

/// C_{jh} = 1 / (r xi_h - P(r xi_j)): rows follow the images P(r xi_j),
/// columns the contour nodes r xi_h. With quadrature weights the columns are
/// scaled by r xi_h / n, giving C D = A + m I.
class CauchyOracle final : public EntryOracle {
 public:
  CauchyOracle(const OffspringGF& gf, const ContourConfig& cfg, bool quadrature_weights = false);

  Eigen::Index rows() const override { return y_.size(); }
  Eigen::Index cols() const override { return x_.size(); }
  Complex entry(Eigen::Index j, Eigen::Index h) const override { return w_(h) / (x_(h) - y_(j)); }
  void row(Eigen::Index j, ComplexVector& out) const override;
  void col(Eigen::Index h, ComplexVector& out) const override;

  const ComplexVector& nodes() const noexcept { return x_; }
  const ComplexVector& images() const noexcept { return y_; }

 private:
  ComplexVector x_;
  ComplexVector y_;
  ComplexVector w_;
};

/// C ~= U V^*, both factors N x k.
struct LowRankFactors {
  ComplexMatrix U;
  ComplexMatrix V;
  double tau = 0.0;
  int rank = 0;
  bool truncated = false;  // stopped at max_rank before the criterion held
  double last_cross_norm = 0.0;  // ||u|| ||v|| of the final cross
};

inline constexpr double kDefaultTau = 1e-10;
inline constexpr int kDefaultMaxRank = 2000;

/// Adaptive cross approximation with partial pivoting, starting at row 0.
/// Stops once ||u|| ||v|| < tau for the cross just added, when the pivot of a
/// residual row drops below 1e-300, or at max_rank (default min(N, 2000)).
LowRankFactors aca(const EntryOracle& oracle, double tau = kDefaultTau, int max_rank = -1);

struct LowRankEigenvector {
  ComplexVector vector;  // U v, not normalized
  Complex eigenvalue;    // smallest eigenvalue of V^* U - m I
  double residual = 0.0;
};

/// Smallest eigenvector of U V^* - m I through the k x k matrix V^* U - m I.
/// Throws EigenAmbiguityError when the reduced eigenvalue sits at -m, or when
/// N > k and the reduced eigenvalue is larger in modulus than m (the -m
/// eigenvalue of the null space would then be the smallest).
LowRankEigenvector eigs_lr(const ComplexMatrix& U, const ComplexMatrix& V, double m,
                           const EigenOptions& options = {});

QsdCoefficients solve_lowrank(const OffspringGF& gf, const ContourConfig& cfg, double tau = kDefaultTau,
                              int max_rank = -1, const EigenOptions& options = {});

/// sigma_{k+1}(C) <= theta^k n / ((1 - theta)(r - p0)), theta = (P(r) - p0)/(r - p0).
double decay_bound_taylor(const OffspringGF& gf, double r, std::size_t n, int k);

struct ZolotarevBound {
  double alpha = 0.0;
  double beta = 0.0;
  double theta = 0.0;
  double bound = 0.0;  // theta^k
};

/// sigma_{k+1}(C) / ||C||_2 <= theta^k with alpha, beta the common inverse
/// points of r S^1 and the circle |z - p0| = P(r) - p0. theta is the ratio of
/// the two concentric image circles, taken as the smaller over the larger.
ZolotarevBound decay_bound_zolotarev(const OffspringGF& gf, double r, int k);

}  // namespace qsd
