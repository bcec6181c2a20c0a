#include "qsd/dense_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "qsd/errors.hpp"

namespace qsd {

namespace {

constexpr double kNormalizationFloor = 1e-14;
constexpr double kTailDrop = 1e-20;
constexpr double kDegenerateGap = 1e-300;

Complex root_of_unity(std::size_t j, std::size_t n) {
  return std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n));
}

}  // namespace

std::string_view method_name(Method method) noexcept {
  switch (method) {
    case Method::Dense:
      return "dense";
    case Method::LowRank:
      return "lowrank";
    case Method::Baseline:
      return "baseline";
  }
  return "unknown";
}

ComplexMatrix assemble_cauchy(const OffspringGF& gf, const ContourConfig& cfg) {
  validate_contour(gf, cfg);
  const auto n = static_cast<Eigen::Index>(cfg.n);
  const double m = gf.mean();
  ComplexVector x(n), y(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    x(j) = cfg.r * root_of_unity(static_cast<std::size_t>(j), cfg.n);
    y(j) = gf.evaluate(x(j));
  }
  const double inv_n = 1.0 / static_cast<double>(n);

  ComplexMatrix a(n, n);
  for (Eigen::Index h = 0; h < n; ++h) {
    const Complex scale = x(h) * inv_n;
    for (Eigen::Index j = 0; j < n; ++j) {
      const Complex gap = x(h) - y(j);
      if (std::abs(gap) < kDegenerateGap)
        throw DegenerateContourError("contour node " + std::to_string(h) + " coincides with P at node " +
                                     std::to_string(j));
      a(j, h) = scale / gap;
    }
    a(h, h) -= m;
  }
  return a;
}

InterpolatedCoefficients coefficients_from_values(ComplexVector values, double r) {
  const auto n = values.size();
  Eigen::Index top = 0;
  values.cwiseAbs().maxCoeff(&top);
  if (std::abs(values(top)) > 0.0) values *= std::conj(values(top)) / std::abs(values(top));

  const ComplexVector f = ifft(values);
  if (std::abs(f(0)) < kNormalizationFloor * f.norm())
    throw NormalizationError("constant coefficient of the interpolant vanishes (|f_0| = " +
                             std::to_string(std::abs(f(0))) + "); cannot normalize");

  const double log_r = std::log(r);
  const Complex t = -1.0 / f(0);
  InterpolatedCoefficients out;
  out.g = RealVector::Zero(n);
  for (Eigen::Index j = 1; j < n; ++j) {
    const Complex gj = t * f(j) * std::exp(-static_cast<double>(j) * log_r);
    out.g(j) = gj.real();
    out.imag_leak = std::max(out.imag_leak, std::abs(gj.imag()));
  }
  return out;
}

double residual(const OffspringGF& gf, const RealVector& g) {
  const auto n = static_cast<std::size_t>(g.size());
  if (n == 0) return std::abs(1.0 - gf.mean());
  Eigen::Index len = g.size();
  double tail = 0.0;
  while (len > 0 && tail + std::abs(g(len - 1)) <= kTailDrop) tail += std::abs(g(--len));

  auto horner = [&](Complex z) {
    Complex acc = 0.0;
    for (Eigen::Index j = len - 1; j >= 0; --j) acc = acc * z + g(j);
    return acc;
  };
  const double m = gf.mean();
  double worst = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const Complex xi = root_of_unity(j, n);
    const Complex defect = horner(gf.evaluate(xi)) - m * horner(xi) - 1.0 + m;
    worst = std::max(worst, std::abs(defect));
  }
  return worst;
}

void finalize(QsdCoefficients& out, const OffspringGF& gf) {
  out.sum = out.g.sum();
  out.residual = residual(gf, out.g);
}

QsdCoefficients solve_dense(const OffspringGF& gf, const ContourConfig& cfg, const EigenOptions& options) {
  require_subcritical(gf);
  if (cfg.n > kMaxDenseNodes)
    throw ConfigurationError("dense solver is limited to n <= 16384 (got " + std::to_string(cfg.n) +
                             "); use the low-rank method");
  const Eigenpair eig = smallest_eigenpair(assemble_cauchy(gf, cfg), options);
  auto coeffs = coefficients_from_values(eig.vector, cfg.r);

  QsdCoefficients out;
  out.g = std::move(coeffs.g);
  out.imag_leak = coeffs.imag_leak;
  out.n = cfg.n;
  out.r = cfg.r;
  out.method = Method::Dense;
  out.eigen_residual = eig.residual;
  finalize(out, gf);
  return out;
}

}  // namespace qsd
