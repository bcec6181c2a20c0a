#include <algorithm>
#include <cmath>
#include <string>

#include "qsd/errors.hpp"
#include "qsd/lowrank.hpp"

namespace qsd {

namespace {

constexpr double kAmbiguityTolerance = 1e-8;

void require_contraction(const OffspringGF& gf, double r) {
  if (!(r > 1.0 && gf.evaluate(r) < r))
    throw ConfigurationError("decay bounds need r > 1 and P(r) < r (r = " + std::to_string(r) + ")");
}

}  // namespace

LowRankEigenvector eigs_lr(const ComplexMatrix& U, const ComplexMatrix& V, double m, const EigenOptions& options) {
  if (U.cols() != V.cols() || U.rows() != V.rows())
    throw ConfigurationError("low-rank factors U and V must have the same shape");
  const Eigen::Index k = U.cols();
  if (k == 0) throw AnalysisError("low-rank factors are empty");

  ComplexMatrix reduced = V.adjoint() * U;
  reduced.diagonal().array() -= m;
  const Eigenpair eig = smallest_eigenpair(std::move(reduced), options);

  const double scale = std::max(1.0, m);
  if (std::abs(eig.value + m) <= kAmbiguityTolerance * scale)
    throw EigenAmbiguityError("smallest eigenvalue of V*U - mI is -m: U V* has a zero eigenvalue there");
  if (U.rows() > k && std::abs(eig.value) > m * (1.0 + kAmbiguityTolerance))
    throw EigenAmbiguityError("reduced eigenvalue |" + std::to_string(std::abs(eig.value)) +
                              "| exceeds m; the null-space eigenvalue -m is smaller");

  LowRankEigenvector out;
  out.vector = U * eig.vector;
  out.eigenvalue = eig.value;
  out.residual = eig.residual;
  return out;
}

QsdCoefficients solve_lowrank(const OffspringGF& gf, const ContourConfig& cfg, double tau, int max_rank,
                              const EigenOptions& options) {
  require_subcritical(gf);
  validate_contour(gf, cfg);
  // ACA on C D directly: the weights all have modulus r/n, so the pivots are
  // those of C and tau bounds the crosses of the matrix actually used.
  LowRankFactors factors = aca(CauchyOracle(gf, cfg, true), tau, max_rank);

  const auto eig = eigs_lr(factors.U, factors.V, gf.mean(), options);
  factors.U.resize(0, 0);
  factors.V.resize(0, 0);
  auto coeffs = coefficients_from_values(eig.vector, cfg.r);

  QsdCoefficients out;
  out.g = std::move(coeffs.g);
  out.imag_leak = coeffs.imag_leak;
  out.n = cfg.n;
  out.r = cfg.r;
  out.method = Method::LowRank;
  out.rank = factors.rank;
  out.rank_truncated = factors.truncated;
  out.eigen_residual = eig.residual;
  finalize(out, gf);
  return out;
}

double decay_bound_taylor(const OffspringGF& gf, double r, std::size_t n, int k) {
  require_contraction(gf, r);
  const double p0 = gf.p0();
  const double theta = (gf.evaluate(r) - p0) / (r - p0);
  if (!(theta > 0.0 && theta < 1.0)) throw AnalysisError("Taylor decay parameter theta is outside (0,1)");
  return std::pow(theta, k) * static_cast<double>(n) / ((1.0 - theta) * (r - p0));
}

ZolotarevBound decay_bound_zolotarev(const OffspringGF& gf, double r, int k) {
  require_contraction(gf, r);
  const double p0 = gf.p0();
  if (!(p0 > 0.0)) throw AnalysisError("Zolotarev bound needs p0 > 0 (the circles are concentric otherwise)");
  const double pr = gf.evaluate(r);
  const double s = 2.0 * p0 * pr - pr * pr + r * r;
  const double disc = s * s - 4.0 * p0 * p0 * r * r;
  if (disc < 0.0) throw AnalysisError("negative discriminant for the common inverse points");

  ZolotarevBound out;
  out.alpha = (s + std::sqrt(disc)) / (2.0 * p0);
  out.beta = r * r / out.alpha;
  const double ratio = (r - out.beta) * (pr - out.alpha) / ((r - out.alpha) * (pr - out.beta));
  out.theta = std::min(std::abs(ratio), 1.0 / std::abs(ratio));
  out.bound = std::pow(out.theta, k);
  return out;
}

}  // namespace qsd
