#pragma once

// Closed forms and analytic cross-checks: the geometric and bivariate
// linear-fractional quasi-stationary laws, and factorial moments.

#include <Eigen/Dense>
#include <vector>

#include "qsd/dense_solver.hpp"
#include "qsd/genfun.hpp"

namespace qsd {

/// g_j = (1 - p/p0) (p/p0)^(j-1), j >= 1; 0 for j = 0.
double linfrac_qsd(double p0, double p, int j);

/// binom(a, b), zero when b > a or b < 0. Exact for a <= 50, log-gamma above.
double binomial(int a, int b);

/// Quasi-stationary law of a two-type linear-fractional process:
/// G(x, y) = ((nu_1 - mu_1) x + (nu_2 - mu_2) y) / (1 - mu_1 x - mu_2 y).
struct LinearFractional2DQsd {
  Eigen::Vector2d nu;  // left Perron vector of M, nu_1 + nu_2 = 1
  Eigen::Vector2d mu;
  double rho = 0.0;

  double coefficient(int h, int k) const;
  Complex evaluate(Complex x, Complex y) const;
};

/// Throws UnsupportedRegimeError unless rho < 1, ModelError if I - M is singular.
LinearFractional2DQsd linfrac2d_parameters(const Eigen::Matrix2d& S, const Eigen::Vector2d& c,
                                           const Eigen::Vector2d& b, double d);

double linfrac2d_qsd(const Eigen::Matrix2d& S, const Eigen::Vector2d& c, const Eigen::Vector2d& b, double d, int h,
                     int k);

/// Factorial moments G^(h)(1), stored at index h - 1.
struct Moments {
  std::vector<double> values;
  bool tail_converged = true;      // coefficient sums only
  bool precision_warning = false;  // recurrence only: m - m^h lost most digits
};

/// (m - m^h) G^(h)(1) = sum_{j<h} G^(j)(1) B_{h,j}(P'(1), ..., P^(h-j+1)(1)),
/// seeded with G'(1) = g1. B_{h,j} = (h!/j!) [z^h] (P(1 + z) - 1)^j.
Moments moments_from_recurrence(const OffspringGF& gf, double g1, int H);

/// G^(h)(1) = sum_{j >= h} j!/(j-h)! g_j. The tail counts as converged when
/// the last coefficient is below 1e-15 in absolute value.
Moments moments_from_coefficients(const RealVector& g, int H);
Moments moments_from_coefficients(const QsdCoefficients& g, int H);

}  // namespace qsd
