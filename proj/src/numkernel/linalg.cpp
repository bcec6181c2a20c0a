#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/LU>

#include "qsd/errors.hpp"
#include "qsd/numkernel.hpp"

namespace qsd {

namespace {

constexpr double kZeroPivot = 1e-300;

}  // namespace

LuFactorization::LuFactorization(ComplexMatrix a, bool allow_singular) : lu_(std::move(a)) {
  if (lu_.rows() != lu_.cols())
    throw ConfigurationError("LU factorization needs a square matrix, got " + std::to_string(lu_.rows()) +
                             "x" + std::to_string(lu_.cols()));
  {
    Eigen::PartialPivLU<Eigen::Ref<ComplexMatrix>> dec(lu_);
    row_perm_ = dec.permutationP().indices();
  }
  for (Eigen::Index i = 0; i < lu_.rows(); ++i) {
    if (std::abs(lu_(i, i)) < kZeroPivot) {
      zero_pivot_ = static_cast<std::size_t>(i);
      break;
    }
  }
  if (zero_pivot_ && !allow_singular)
    throw SingularMatrixError("LU pivot " + std::to_string(*zero_pivot_) + " below 1e-300: matrix is singular");
}

ComplexVector LuFactorization::solve(const ComplexVector& b) const {
  if (b.size() != lu_.rows())
    throw ConfigurationError("right-hand side length does not match the factorized matrix");
  if (zero_pivot_) throw SingularMatrixError("cannot solve with a singular factorization");
  // P A = L U with P mapping row i to row_perm_[i].
  ComplexVector y(b.size());
  for (Eigen::Index i = 0; i < b.size(); ++i) y(row_perm_(i)) = b(i);
  lu_.triangularView<Eigen::UnitLower>().solveInPlace(y);
  lu_.triangularView<Eigen::Upper>().solveInPlace(y);
  return y;
}

ComplexVector LuFactorization::null_vector() const {
  if (!zero_pivot_) throw ConfigurationError("null_vector requested for a nonsingular factorization");
  const auto k = static_cast<Eigen::Index>(*zero_pivot_);
  ComplexVector x = ComplexVector::Zero(lu_.rows());
  x(k) = 1.0;
  if (k > 0) {
    ComplexVector head = -lu_.col(k).head(k);
    lu_.topLeftCorner(k, k).triangularView<Eigen::Upper>().solveInPlace(head);
    x.head(k) = head;
  }
  x.normalize();
  return x;
}

ComplexVector lu_solve(const ComplexMatrix& a, const ComplexVector& b) {
  return LuFactorization(a).solve(b);
}

Eigenpair smallest_eigenpair(ComplexMatrix a, const EigenOptions& options) {
  const auto n = a.rows();
  if (n == 0 || n != a.cols()) throw ConfigurationError("smallest_eigenpair needs a non-empty square matrix");
  const double norm_f = a.norm();
  const double target = options.tol * norm_f;

  const LuFactorization lu(std::move(a), /*allow_singular=*/true);
  if (lu.first_zero_pivot()) return Eigenpair{0.0, lu.null_vector(), 0.0, 0};

  ComplexVector start = ComplexVector::Ones(n);
  bool restarted = false;
  double last_residual = std::numeric_limits<double>::infinity();

  auto run = [&](ComplexVector v, int budget, int& used) -> std::optional<Eigenpair> {
    v.normalize();
    std::vector<double> history;
    for (used = 0; used < budget; ++used) {
      // A w = v, so for w_hat = w/|w|: A w_hat - lambda w_hat = (v - lambda w)/|w|.
      ComplexVector w = lu.solve(v);
      const double w_norm = w.norm();
      if (!std::isfinite(w_norm)) break;
      const Complex lambda = w.dot(v) / (w_norm * w_norm);
      last_residual = (v - lambda * w).norm() / w_norm;
      v = w / w_norm;
      if (last_residual <= target) return Eigenpair{lambda, std::move(v), last_residual, used + 1};
      history.push_back(last_residual);
      const auto h = history.size();
      if (!restarted && h >= 10 && history[h - 1] > 0.5 * history[h - 6]) break;  // stagnation
    }
    return std::nullopt;
  };

  int used = 0;
  if (auto pair = run(start, options.max_iter, used)) return *pair;
  const int remaining = options.max_iter - used;
  if (remaining > 0) {
    restarted = true;
    start(0) += 1e-3 * std::sqrt(static_cast<double>(n));  // ones/sqrt(n) + 1e-3 e_1, before normalization
    int used_again = 0;
    if (auto pair = run(start, remaining, used_again)) {
      pair->iterations += used;
      return *pair;
    }
  }
  throw IterationFailure("inverse iteration did not reach residual " + std::to_string(target) + " in " +
                             std::to_string(options.max_iter) + " iterations (last residual " +
                             std::to_string(last_residual) + ")",
                         last_residual);
}

}  // namespace qsd
