#include "qsd/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "qsd/errors.hpp"
#include "qsd/multitype.hpp"

namespace qsd {

namespace {

constexpr int kExactBinomialLimit = 50;
constexpr double kTailFloor = 1e-15;
constexpr double kPrecisionFloor = 1e-8;

}  // namespace

double linfrac_qsd(double p0, double p, int j) {
  if (!(p >= 0.0 && p < p0 && p0 < 1.0))
    throw UnsupportedRegimeError("linear-fractional law needs 0 <= p < p0 < 1 to be subcritical");
  if (j < 0) throw ConfigurationError("coefficient index must be nonnegative");
  if (j == 0) return 0.0;
  const double q = p / p0;
  return (1.0 - q) * std::pow(q, j - 1);
}

double binomial(int a, int b) {
  if (b < 0 || a < 0 || b > a) return 0.0;
  if (a <= kExactBinomialLimit) {
    b = std::min(b, a - b);
    std::uint64_t out = 1;
    for (int i = 1; i <= b; ++i) out = out * static_cast<std::uint64_t>(a - b + i) / static_cast<std::uint64_t>(i);
    return static_cast<double>(out);
  }
  return std::exp(std::lgamma(a + 1.0) - std::lgamma(b + 1.0) - std::lgamma(a - b + 1.0));
}

double LinearFractional2DQsd::coefficient(int h, int k) const {
  if (h < 0 || k < 0) throw ConfigurationError("coefficient indices must be nonnegative");
  if (h == 0 && k == 0) return 0.0;
  double out = 0.0;
  const double first = binomial(h + k - 1, k);
  if (first != 0.0) out += (nu(0) - mu(0)) * first * std::pow(mu(0), h - 1) * std::pow(mu(1), k);
  const double second = binomial(h + k - 1, h);
  if (second != 0.0) out += (nu(1) - mu(1)) * second * std::pow(mu(0), h) * std::pow(mu(1), k - 1);
  return out;
}

Complex LinearFractional2DQsd::evaluate(Complex x, Complex y) const {
  return ((nu(0) - mu(0)) * x + (nu(1) - mu(1)) * y) / (1.0 - mu(0) * x - mu(1) * y);
}

LinearFractional2DQsd linfrac2d_parameters(const Eigen::Matrix2d& S, const Eigen::Vector2d& c,
                                           const Eigen::Vector2d& b, double d) {
  const auto model = BivariateOffspring::linear_fractional(S, c, b, d);
  require_subcritical(model);
  const Eigen::Matrix2d& M = model.mean_matrix();

  LinearFractional2DQsd out;
  out.rho = model.rho();
  // nu^T M = rho nu^T; M(1,0) > 0 by positive regularity.
  out.nu = Eigen::Vector2d(M(1, 0), out.rho - M(0, 0));
  out.nu /= out.nu.sum();

  const Eigen::Vector2d t = -c / d;
  const double t0 = 1.0 - t.sum();
  if (!(t0 > 0.0)) throw ModelError("linear-fractional t0 = 1 - (t1 + t2) must be positive");
  const Eigen::RowVector2d w = t.transpose() / t0;
  const Eigen::Matrix2d resolvent_base = Eigen::Matrix2d::Identity() - M;
  if (std::abs(resolvent_base.determinant()) < 1e-300) throw ModelError("I - M is singular");
  const Eigen::RowVector2d wr = w * resolvent_base.inverse();
  out.mu = (wr / (1.0 + wr.sum())).transpose();
  return out;
}

double linfrac2d_qsd(const Eigen::Matrix2d& S, const Eigen::Vector2d& c, const Eigen::Vector2d& b, double d, int h,
                     int k) {
  return linfrac2d_parameters(S, c, b, d).coefficient(h, k);
}

Moments moments_from_recurrence(const OffspringGF& gf, double g1, int H) {
  if (H < 1) throw ConfigurationError("moment order H must be at least 1");
  require_subcritical(gf);
  const double m = gf.mean();
  const auto len = static_cast<std::size_t>(H) + 1;

  // f(z) = P(1 + z) - 1, truncated at degree H.
  std::vector<double> f = gf.taylor_at_one(H);
  f[0] = 0.0;

  // powers[j][h] = [z^h] f(z)^j
  std::vector<std::vector<double>> powers(len, std::vector<double>(len, 0.0));
  powers[0][0] = 1.0;
  for (std::size_t j = 1; j < len; ++j)
    for (std::size_t a = 0; a < len; ++a) {
      if (powers[j - 1][a] == 0.0) continue;
      for (std::size_t s = 1; a + s < len; ++s) powers[j][a + s] += powers[j - 1][a] * f[s];
    }
  std::vector<double> factorial(len, 1.0);
  for (std::size_t i = 1; i < len; ++i) factorial[i] = factorial[i - 1] * static_cast<double>(i);

  Moments out;
  out.values.assign(static_cast<std::size_t>(H), 0.0);
  out.values[0] = g1;
  for (std::size_t h = 2; h < len; ++h) {
    double rhs = 0.0;
    for (std::size_t j = 1; j < h; ++j) rhs += out.values[j - 1] * factorial[h] / factorial[j] * powers[j][h];
    const double lhs = m - std::pow(m, static_cast<double>(h));
    if (lhs < kPrecisionFloor * m) out.precision_warning = true;
    out.values[h - 1] = rhs / lhs;
  }
  return out;
}

Moments moments_from_coefficients(const RealVector& g, int H) {
  if (H < 1) throw ConfigurationError("moment order H must be at least 1");
  Moments out;
  out.values.assign(static_cast<std::size_t>(H), 0.0);
  for (Eigen::Index j = 1; j < g.size(); ++j) {
    double falling = 1.0;  // j!/(j-h)!
    for (int h = 1; h <= H && h <= j; ++h) {
      falling *= static_cast<double>(j - h + 1);
      out.values[static_cast<std::size_t>(h - 1)] += falling * g(j);
    }
  }
  out.tail_converged = g.size() == 0 || std::abs(g(g.size() - 1)) < kTailFloor;
  return out;
}

Moments moments_from_coefficients(const QsdCoefficients& g, int H) { return moments_from_coefficients(g.g, H); }

}  // namespace qsd
