#pragma once

// Evaluation-interpolation on the circle of radius r: the Cauchy-structured
// eigenproblem whose smallest eigenvector carries the values of G(r z) at the
// n-th roots of unity.

#include <cstddef>
#include <string_view>

#include "qsd/genfun.hpp"
#include "qsd/numkernel.hpp"

namespace qsd {

enum class Method { Dense, LowRank, Baseline };

std::string_view method_name(Method method) noexcept;

/// Coefficients g_0..g_{n-1} of the quasi-stationary generating function,
/// with g_0 = 0, plus run diagnostics.
struct QsdCoefficients {
  RealVector g;
  std::size_t n = 0;
  double r = 0.0;
  double residual = 0.0;  // functional-equation defect on the unit circle
  double sum = 0.0;
  double imag_leak = 0.0;  // max |Im g_j| dropped when taking real parts
  Method method = Method::Dense;
  int rank = 0;                 // low-rank path only
  bool rank_truncated = false;  // ACA hit its rank cap
  double eigen_residual = 0.0;
  bool ill_conditioned = false;  // least-squares baselines only
};

/// Dense dimension limit for the single-type problem.
inline constexpr std::size_t kMaxDenseNodes = 16384;

/// A_{jh} = r xi_h / (n (r xi_h - P(r xi_j))) - m delta_{jh}, xi_h = exp(2 pi i h / n).
ComplexMatrix assemble_cauchy(const OffspringGF& gf, const ContourConfig& cfg);

struct InterpolatedCoefficients {
  RealVector g;
  double imag_leak = 0.0;
};

/// Eigenvector values at r xi_j -> normalized coefficients: gauge fix,
/// inverse FFT, divide by r^j, scale by -1/f_0, zero the constant term.
/// Throws NormalizationError when |f_0| < 1e-14 ||f||.
InterpolatedCoefficients coefficients_from_values(ComplexVector values, double r);

/// max_j |G(P(xi_j)) - m G(xi_j) - 1 + m| over the n-th roots of unity,
/// n = g.size(). Trailing coefficients whose absolute sum is below 1e-20 are
/// skipped; on the closed unit disc that changes the result by at most that.
double residual(const OffspringGF& gf, const RealVector& g);

QsdCoefficients solve_dense(const OffspringGF& gf, const ContourConfig& cfg, const EigenOptions& options = {});

/// Fills sum and residual from g.
void finalize(QsdCoefficients& out, const OffspringGF& gf);

}  // namespace qsd
