#pragma once

// Offspring probability generating functions P(z) of single-type
// Galton-Watson processes, and the contour data derived from them.

#include <concepts>
#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

#include "qsd/numkernel.hpp"

namespace qsd {

/// P(z) = sum_j p_j z^j with finitely many terms.
struct PolynomialGF {
  std::vector<double> coeffs;  // p_0 .. p_d

  Complex evaluate(Complex z) const;
  Complex derivative(Complex z, int order) const;
  double radius_of_convergence() const;
  std::size_t degree() const;
};

/// Modified-geometric law: p_j = (1 - p0)(1 - p) p^(j-1) for j >= 1, so
/// P(z) = p0 + (1 - p0)(1 - p) z / (1 - p z). Pole at z = 1/p.
struct LinearFractionalGF {
  double p0 = 0.0;
  double p = 0.0;

  Complex evaluate(Complex z) const;
  Complex derivative(Complex z, int order) const;
  double radius_of_convergence() const;
};

/// What a generating-function family has to provide to be usable by the
/// solvers. New families plug in by satisfying this and joining the variant.
template <typename T>
concept GeneratingFunctionFamily = requires(const T& gf, Complex z, int order) {
  { gf.evaluate(z) } -> std::same_as<Complex>;
  { gf.derivative(z, order) } -> std::same_as<Complex>;
  { gf.radius_of_convergence() } -> std::same_as<double>;
};

static_assert(GeneratingFunctionFamily<PolynomialGF>);
static_assert(GeneratingFunctionFamily<LinearFractionalGF>);

class OffspringGF {
 public:
  using Family = std::variant<PolynomialGF, LinearFractionalGF>;

  /// Validated polynomial: p_j in [0,1], sum within 1e-12 of 1 (never
  /// renormalized), 0 < p_0 + p_1 < 1.
  static OffspringGF polynomial(std::vector<double> coeffs);

  /// Validated linear-fractional law with 0 <= p < p0 < 1 (subcritical).
  static OffspringGF linear_fractional(double p0, double p);

  /// P(z) = 1 - m + m z. This is the one degree-1 law; it violates the
  /// 0 < p_0 + p_1 < 1 assumption, so it has its own constructor.
  static OffspringGF affine(double m);

  const Family& family() const noexcept { return family_; }

  Complex evaluate(Complex z) const;
  double evaluate(double x) const;

  /// h-th derivative, h >= 1.
  Complex derivative_at(Complex z, int order) const;

  double mean() const noexcept { return mean_; }
  double p0() const;
  double radius_of_convergence() const;
  bool is_affine() const;

  /// Taylor coefficients of P around 1: P^(s)(1)/s!, s = 0..order.
  std::vector<double> taylor_at_one(int order) const;

 private:
  explicit OffspringGF(Family family);

  Family family_;
  double mean_ = 0.0;
};

/// Throws UnsupportedRegimeError unless 0 < m < 1.
void require_subcritical(const OffspringGF& gf);

/// Threshold psi_P with P(x) < x on (1, psi_P); +infinity for affine P.
double psi_p(const OffspringGF& gf);

/// Radius used when P is affine and P(x) - x has no minimizer.
inline constexpr double kAffineRadiusCap = 2.0;

/// argmin over (1, psi_P) of P(x) - x by golden-section search. Always
/// returns r with 1 < r and P(r) < r.
double choose_radius(const OffspringGF& gf);

/// Reference envelope psi_P^(-j) for the coefficient decay.
double decay_envelope(const OffspringGF& gf, int j);

struct ContourConfig {
  std::size_t n = 0;
  double r = 0.0;
  bool auto_r = false;
};

/// Builds a contour configuration, picking r with choose_radius when it is
/// not given, and checks n is a power of two, r > 1 and P(r) < r.
ContourConfig make_contour(const OffspringGF& gf, std::size_t n, std::optional<double> r = std::nullopt);

void validate_contour(const OffspringGF& gf, const ContourConfig& cfg);

/// The radius part of validate_contour: 1 < r < r_P and P(r) < r.
void validate_radius(const OffspringGF& gf, double r);

/// Golden-section minimizer of f on [lo, hi] to tolerance tol in x. Shared
/// with the two-type radius selection.
template <typename F>
double golden_section_minimize(F&& f, double lo, double hi, double tol);

}  // namespace qsd

#include "qsd/detail/golden_section.hpp"
