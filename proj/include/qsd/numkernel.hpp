#pragma once

// Complex numerical primitives shared by the solvers.
//
// Matrices are Eigen column-major containers. Every routine is a pure
// function of its arguments.

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace qsd {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

bool is_power_of_two(std::size_t n) noexcept;

/// Evaluates the polynomial with the given coefficients at the n-th roots of
/// unity w^j, w = exp(2 pi i/n): out_j = sum_k c_k exp(2 pi i jk/n).
/// No scaling. n must be a power of two.
ComplexVector fft(const ComplexVector& coefficients);

/// Inverse of fft: out_k = (1/n) sum_j values_j exp(-2 pi i jk/n). If
/// values_j = q(w^j) with deg q < n, the result holds the coefficients of q.
ComplexVector ifft(const ComplexVector& values);

/// 2D variants: the 1D transform applied along both axes of an n x n matrix.
/// Row index is the first variable's exponent, column the second's.
ComplexMatrix fft2(const ComplexMatrix& values);
ComplexMatrix ifft2(const ComplexMatrix& values);

/// Partial-pivoting LU factorization of a square complex matrix, computed in
/// place. Construction throws SingularMatrixError if any pivot satisfies
/// |pivot| < 1e-300 unless `allow_singular` is set, in which case the
/// position of the first such pivot is reported by `first_zero_pivot()`.
class LuFactorization {
 public:
  explicit LuFactorization(ComplexMatrix a, bool allow_singular = false);

  std::size_t size() const noexcept { return static_cast<std::size_t>(lu_.rows()); }
  ComplexVector solve(const ComplexVector& b) const;
  std::optional<std::size_t> first_zero_pivot() const noexcept { return zero_pivot_; }

  /// A unit vector x with A x = 0 (exactly, in the factorized arithmetic),
  /// available when a zero pivot was detected.
  ComplexVector null_vector() const;

 private:
  ComplexMatrix lu_;
  Eigen::VectorXi row_perm_;  // row_perm_[i]: original row placed at i
  std::optional<std::size_t> zero_pivot_;
};

ComplexVector lu_solve(const ComplexMatrix& a, const ComplexVector& b);

struct EigenOptions {
  /// Residual tolerance relative to ||A||_F.
  double tol = 1e-13;
  int max_iter = 200;
};

struct Eigenpair {
  Complex value;
  ComplexVector vector;  // unit 2-norm
  double residual = 0.0;  // ||A v - lambda v||_2
  int iterations = 0;
};

/// Smallest-modulus eigenpair by shift-zero inverse iteration on an LU
/// factorization of `a`. The matrix is consumed (factorized in place), so
/// pass it with std::move when it is large.
///
/// Starts from the normalized all-ones vector; if the residual stagnates the
/// iteration restarts once from ones + 1e-3 e_1. A singular matrix yields
/// (0, null vector). Throws IterationFailure after max_iter iterations.
Eigenpair smallest_eigenpair(ComplexMatrix a, const EigenOptions& options = {});

/// Singular values in descending order, via one-sided Jacobi (after a
/// column-pivoted QR preconditioning step). Intended for min(rows, cols) <= 2000.
RealVector singular_values(const ComplexMatrix& a);

struct PolyFit {
  RealVector coefficients;  // monomial basis, ascending powers
  double condition = 0.0;   // 2-norm condition number of the triangular factor
  bool ill_conditioned = false;
};

/// Least-squares polynomial fit of the given degree through (xs, ys).
PolyFit polyfit_real(std::span<const double> xs, std::span<const double> ys, int degree);

}  // namespace qsd
