#include "qsd/genfun.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "qsd/errors.hpp"

namespace qsd {

namespace {

constexpr double kSumTolerance = 1e-12;
constexpr double kRootTolerance = 1e-12;
constexpr double kMinimizerTolerance = 1e-10;
constexpr double kPoleGuard = 1e-300;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

double factorial_ratio(std::size_t j, int h) {  // j!/(j-h)!
  double out = 1.0;
  for (int i = 0; i < h; ++i) out *= static_cast<double>(j - static_cast<std::size_t>(i));
  return out;
}

}  // namespace

// ---- PolynomialGF -----------------------------------------------------------

Complex PolynomialGF::evaluate(Complex z) const {
  Complex acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * z + *it;
  return acc;
}

Complex PolynomialGF::derivative(Complex z, int order) const {
  if (order < 1) throw ConfigurationError("derivative order must be >= 1");
  const auto h = static_cast<std::size_t>(order);
  if (coeffs.size() <= h) return 0.0;
  Complex acc = 0.0;
  for (std::size_t j = coeffs.size() - 1; j >= h; --j) {
    acc = acc * z + coeffs[j] * factorial_ratio(j, order);
    if (j == h) break;
  }
  return acc;
}

double PolynomialGF::radius_of_convergence() const { return std::numeric_limits<double>::infinity(); }

std::size_t PolynomialGF::degree() const {
  std::size_t d = coeffs.empty() ? 0 : coeffs.size() - 1;
  while (d > 0 && coeffs[d] == 0.0) --d;
  return d;
}

// ---- LinearFractionalGF -----------------------------------------------------

Complex LinearFractionalGF::evaluate(Complex z) const {
  const Complex denom = 1.0 - p * z;
  if (std::abs(denom) < kPoleGuard)
    throw DomainError("linear-fractional generating function evaluated at its pole z = 1/p");
  return p0 + (1.0 - p0) * (1.0 - p) * z / denom;
}

Complex LinearFractionalGF::derivative(Complex z, int order) const {
  if (order < 1) throw ConfigurationError("derivative order must be >= 1");
  const Complex denom = 1.0 - p * z;
  if (std::abs(denom) < kPoleGuard)
    throw DomainError("linear-fractional generating function differentiated at its pole z = 1/p");
  // h! (1-p0)(1-p) p^(h-1) / (1 - p z)^(h+1)
  double scale = (1.0 - p0) * (1.0 - p);
  for (int i = 1; i <= order; ++i) scale *= i;
  return scale * std::pow(p, order - 1) / std::pow(denom, order + 1);
}

double LinearFractionalGF::radius_of_convergence() const {
  return p > 0.0 ? 1.0 / p : std::numeric_limits<double>::infinity();
}

// ---- OffspringGF ------------------------------------------------------------

OffspringGF::OffspringGF(Family family) : family_(std::move(family)) {
  mean_ = derivative_at(Complex(1.0), 1).real();
}

OffspringGF OffspringGF::polynomial(std::vector<double> coeffs) {
  if (coeffs.size() < 2) throw ValidationError("polynomial offspring law needs at least p_0 and p_1");
  for (std::size_t j = 0; j < coeffs.size(); ++j) {
    if (!(coeffs[j] >= 0.0 && coeffs[j] <= 1.0))
      throw ValidationError("offspring probability p_" + std::to_string(j) + " = " + std::to_string(coeffs[j]) +
                            " is outside [0,1]");
  }
  const double total = std::accumulate(coeffs.begin(), coeffs.end(), 0.0);
  if (std::abs(total - 1.0) > kSumTolerance)
    throw ValidationError("offspring probabilities sum to " + std::to_string(total) + ", not 1 (tolerance 1e-12)");
  const double low = coeffs[0] + coeffs[1];
  if (!(low > 0.0 && low < 1.0))
    throw ValidationError("offspring law must satisfy 0 < p_0 + p_1 < 1, got " + std::to_string(low));
  return OffspringGF(PolynomialGF{std::move(coeffs)});
}

OffspringGF OffspringGF::linear_fractional(double p0, double p) {
  if (!(p0 >= 0.0 && p0 < 1.0)) throw ValidationError("linear-fractional p0 must lie in [0,1)");
  if (!(p >= 0.0 && p < 1.0)) throw ValidationError("linear-fractional p must lie in [0,1)");
  if (!(p0 > p))
    throw ValidationError("linear-fractional law is subcritical only if p0 > p (got p0=" + std::to_string(p0) +
                          ", p=" + std::to_string(p) + ")");
  return OffspringGF(LinearFractionalGF{p0, p});
}

OffspringGF OffspringGF::affine(double m) {
  if (!(m > 0.0 && m < 1.0)) throw ValidationError("affine offspring law needs mean in (0,1)");
  return OffspringGF(PolynomialGF{{1.0 - m, m}});
}

Complex OffspringGF::evaluate(Complex z) const {
  return std::visit([&](const auto& f) { return f.evaluate(z); }, family_);
}

double OffspringGF::evaluate(double x) const { return evaluate(Complex(x)).real(); }

Complex OffspringGF::derivative_at(Complex z, int order) const {
  return std::visit([&](const auto& f) { return f.derivative(z, order); }, family_);
}

double OffspringGF::p0() const {
  return std::visit(Overloaded{[](const PolynomialGF& f) { return f.coeffs[0]; },
                               [](const LinearFractionalGF& f) { return f.p0; }},
                    family_);
}

double OffspringGF::radius_of_convergence() const {
  return std::visit([](const auto& f) { return f.radius_of_convergence(); }, family_);
}

bool OffspringGF::is_affine() const {
  return std::visit(Overloaded{[](const PolynomialGF& f) { return f.degree() <= 1; },
                               [](const LinearFractionalGF& f) { return f.p == 0.0; }},
                    family_);
}

std::vector<double> OffspringGF::taylor_at_one(int order) const {
  if (order < 0) throw ConfigurationError("Taylor order must be non-negative");
  const auto len = static_cast<std::size_t>(order) + 1;
  std::vector<double> out(len, 0.0);
  std::visit(Overloaded{[&](const PolynomialGF& f) {
                          // b_s = sum_{j >= s} p_j binom(j, s)
                          for (std::size_t j = 0; j < f.coeffs.size(); ++j) {
                            double binom = 1.0;
                            for (std::size_t s = 0; s <= j && s < len; ++s) {
                              out[s] += f.coeffs[j] * binom;
                              binom = binom * static_cast<double>(j - s) / static_cast<double>(s + 1);
                            }
                          }
                        },
                        [&](const LinearFractionalGF& f) {
                          out[0] = 1.0;
                          // (1-p0) p^(s-1) / (1-p)^s
                          double term = (1.0 - f.p0) / (1.0 - f.p);
                          for (std::size_t s = 1; s < len; ++s) {
                            out[s] = term;
                            term *= f.p / (1.0 - f.p);
                          }
                        }},
             family_);
  return out;
}

// ---- analysis ---------------------------------------------------------------

void require_subcritical(const OffspringGF& gf) {
  const double m = gf.mean();
  if (!(m > 0.0 && m < 1.0))
    throw UnsupportedRegimeError("offspring mean m = " + std::to_string(m) + " is not in (0,1) (subcritical)");
}

double psi_p(const OffspringGF& gf) {
  require_subcritical(gf);
  if (gf.is_affine()) return std::numeric_limits<double>::infinity();

  const double rp = gf.radius_of_convergence();
  auto excess = [&](double x) { return gf.evaluate(x) - x; };

  double hi = 0.0;
  if (std::isfinite(rp)) {
    // P(r_P) < r_P: P stays below the diagonal up to the radius of convergence.
    // A pole at r_P gives a meaningless value here, hence the lower check.
    try {
      const double at_radius = gf.evaluate(rp);
      if (at_radius >= 1.0 && at_radius < rp) return rp;
    } catch (const DomainError&) {
    }
    hi = rp;
  } else {
    hi = 2.0;
    while (!(excess(hi) > 0.0)) {
      hi = 1.0 + 2.0 * (hi - 1.0);
      if (!std::isfinite(hi) || hi > 1e300) throw AnalysisError("no upper bracket found for the fixed point of P");
    }
  }

  double lo = 1.0;
  while (hi - lo > kRootTolerance) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (excess(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  const double root = 0.5 * (lo + hi);
  if (!(root > 1.0)) throw AnalysisError("fixed point of P collapsed onto 1");
  return root;
}

double choose_radius(const OffspringGF& gf) {
  require_subcritical(gf);
  const double psi = psi_p(gf);
  if (!std::isfinite(psi)) return kAffineRadiusCap;
  if (!(psi > 1.0)) throw UnsupportedRegimeError("psi_P <= 1: no admissible contour radius");

  const double r = golden_section_minimize([&](double x) { return gf.evaluate(x) - x; }, 1.0, psi,
                                           kMinimizerTolerance);
  if (!(r > 1.0 && gf.evaluate(r) < r))
    throw AnalysisError("radius search returned r = " + std::to_string(r) + " without P(r) < r");
  return r;
}

double decay_envelope(const OffspringGF& gf, int j) {
  const double psi = psi_p(gf);
  if (!std::isfinite(psi)) throw ConfigurationError("decay envelope needs a finite psi_P");
  return std::pow(psi, -static_cast<double>(j));
}

void validate_radius(const OffspringGF& gf, double r) {
  if (!(r > 1.0)) throw ConfigurationError("contour radius r = " + std::to_string(r) + " must exceed 1");
  if (std::isfinite(gf.radius_of_convergence()) && !(r < gf.radius_of_convergence()))
    throw ConfigurationError("contour radius lies outside the disc of convergence of P");
  if (!(gf.evaluate(r) < r))
    throw ConfigurationError("contour radius r = " + std::to_string(r) + " violates P(r) < r");
}

void validate_contour(const OffspringGF& gf, const ContourConfig& cfg) {
  if (!is_power_of_two(cfg.n))
    throw ConfigurationError("number of nodes n = " + std::to_string(cfg.n) + " is not a power of two");
  validate_radius(gf, cfg.r);
}

ContourConfig make_contour(const OffspringGF& gf, std::size_t n, std::optional<double> r) {
  require_subcritical(gf);
  ContourConfig cfg{n, r ? *r : choose_radius(gf), !r.has_value()};
  validate_contour(gf, cfg);
  return cfg;
}

}  // namespace qsd
