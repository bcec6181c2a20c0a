#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "qsd/errors.hpp"
#include "qsd/multitype.hpp"

namespace qsd {

namespace {

constexpr double kSumTolerance = 1e-12;
constexpr int kEnclosureSamples = 64;
constexpr double kDenominatorFloor = 1e-12;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

Complex horner_2d(const RealMatrix& p, Complex x, Complex y) {
  Complex acc = 0.0;
  for (Eigen::Index h = p.rows() - 1; h >= 0; --h) {
    Complex row = 0.0;
    for (Eigen::Index k = p.cols() - 1; k >= 0; --k) row = row * y + p(h, k);
    acc = acc * x + row;
  }
  return acc;
}

void check_grid(const RealMatrix& p, const char* name) {
  if (p.size() == 0) throw ValidationError(std::string(name) + " coefficient grid is empty");
  if (!(p.array() >= 0.0).all() || !p.allFinite())
    throw ValidationError(std::string(name) + " coefficient grid has negative or non-finite entries");
  const double total = p.sum();
  if (std::abs(total - 1.0) > kSumTolerance)
    throw ValidationError(std::string(name) + " probabilities sum to " + std::to_string(total) +
                          ", not 1 (tolerance 1e-12)");
}

Eigen::Vector2d polynomial_means(const RealMatrix& p) {
  Eigen::Vector2d out = Eigen::Vector2d::Zero();
  for (Eigen::Index h = 0; h < p.rows(); ++h)
    for (Eigen::Index k = 0; k < p.cols(); ++k) {
      out(0) += static_cast<double>(h) * p(h, k);
      out(1) += static_cast<double>(k) * p(h, k);
    }
  return out;
}

std::vector<double> diagonal_coefficients(const RealMatrix& p) {
  std::vector<double> q(static_cast<std::size_t>(p.rows() + p.cols() - 1), 0.0);
  for (Eigen::Index h = 0; h < p.rows(); ++h)
    for (Eigen::Index k = 0; k < p.cols(); ++k) q[static_cast<std::size_t>(h + k)] += p(h, k);
  while (q.size() > 1 && q.back() == 0.0) q.pop_back();
  return q;
}

// Type radius for a diagonal restriction that may be constant.
double type_radius(const BivariateOffspring& b, int j) {
  if (const auto* poly = std::get_if<Polynomial2D>(&b.family())) {
    if (diagonal_coefficients(j == 0 ? poly->p1 : poly->p2).size() == 1) return kAffineRadiusCap;
  }
  return choose_radius(b.diagonal(j));
}

}  // namespace

BivariateOffspring::BivariateOffspring(Family family) : family_(std::move(family)) {
  const MeanMatrix mm = mean_matrix_and_rho(family_);
  M_ = mm.M;
  rho_ = mm.rho;
}

BivariateOffspring BivariateOffspring::polynomial(RealMatrix p1, RealMatrix p2) {
  check_grid(p1, "P_1");
  check_grid(p2, "P_2");
  return BivariateOffspring(Polynomial2D{std::move(p1), std::move(p2)});
}

BivariateOffspring BivariateOffspring::linear_fractional(const Eigen::Matrix2d& S, const Eigen::Vector2d& c,
                                                         const Eigen::Vector2d& b, double d) {
  if (!S.allFinite() || !c.allFinite() || !b.allFinite() || !std::isfinite(d))
    throw ValidationError("linear-fractional parameters must be finite");
  if (!(d > 0.0)) throw ValidationError("linear-fractional d must be positive");
  if (!(c.array() <= 0.0).all()) throw ValidationError("linear-fractional c must be nonpositive");
  if (!(S.array() >= 0.0).all() || !(b.array() >= 0.0).all())
    throw ValidationError("linear-fractional S and b must be nonnegative");
  const double denom = c.sum() + d;
  if (!(denom > 0.0)) throw ValidationError("linear-fractional denominator vanishes at (1,1)");
  for (int j = 0; j < 2; ++j) {
    const double at_one = (S.row(j).sum() + b(j)) / denom;
    if (std::abs(at_one - 1.0) > kSumTolerance)
      throw ValidationError("linear-fractional P_" + std::to_string(j + 1) + "(1,1) = " + std::to_string(at_one) +
                            ", not 1");
  }
  return BivariateOffspring(LinearFractional2D{S, c, b, d});
}

Complex BivariateOffspring::evaluate(int j, Complex x, Complex y) const {
  if (j != 0 && j != 1) throw ConfigurationError("type index must be 0 or 1");
  return std::visit(Overloaded{[&](const Polynomial2D& f) { return horner_2d(j == 0 ? f.p1 : f.p2, x, y); },
                               [&](const LinearFractional2D& f) {
                                 const Complex den = f.c(0) * x + f.c(1) * y + f.d;
                                 if (std::abs(den) < kDenominatorFloor * f.d)
                                   throw DomainError("bivariate linear-fractional law evaluated at its pole");
                                 return (f.S(j, 0) * x + f.S(j, 1) * y + f.b(j)) / den;
                               }},
                    family_);
}

double BivariateOffspring::evaluate(int j, double x, double y) const {
  return evaluate(j, Complex(x), Complex(y)).real();
}

OffspringGF BivariateOffspring::diagonal(int j) const {
  if (j != 0 && j != 1) throw ConfigurationError("type index must be 0 or 1");
  try {
    return std::visit(Overloaded{[&](const Polynomial2D& f) {
                                   auto q = diagonal_coefficients(j == 0 ? f.p1 : f.p2);
                                   if (q.size() == 2) return OffspringGF::affine(q[1]);
                                   return OffspringGF::polynomial(std::move(q));
                                 },
                                 [&](const LinearFractional2D& f) {
                                   return OffspringGF::linear_fractional(f.b(j) / f.d, -f.c.sum() / f.d);
                                 }},
                      family_);
  } catch (const ValidationError& e) {
    throw UnsupportedRegimeError("P_" + std::to_string(j + 1) + "(x,x) admits no contour radius: " + e.what());
  }
}

MeanMatrix mean_matrix_and_rho(const BivariateOffspring::Family& family, bool require_regular) {
  MeanMatrix out;
  std::visit(Overloaded{[&](const Polynomial2D& f) {
                          out.M.row(0) = polynomial_means(f.p1).transpose();
                          out.M.row(1) = polynomial_means(f.p2).transpose();
                        },
                        [&](const LinearFractional2D& f) {
                          out.M = (f.S - Eigen::Vector2d::Ones() * f.c.transpose()) / (f.c.sum() + f.d);
                        }},
             family);
  if (!(out.M.array() >= 0.0).all()) throw ModelError("mean progeny matrix has negative entries");
  const Eigen::Matrix2d sq = out.M * out.M;
  if (require_regular && !(sq.array() > 0.0).all()) throw ModelError("mean progeny matrix is not positive regular");
  const double tr = out.M.trace();
  const double det = out.M.determinant();
  out.rho = 0.5 * (tr + std::sqrt(std::max(0.0, tr * tr - 4.0 * det)));
  return out;
}

void require_subcritical(const BivariateOffspring& b) {
  if (!(b.rho() < 1.0))
    throw UnsupportedRegimeError("Perron root rho = " + std::to_string(b.rho()) + " is not below 1 (subcritical)");
}

void validate_radii(const BivariateOffspring& b, const Radii& radii) {
  const std::array<double, 2> r{radii.r1, radii.r2};
  for (int j = 0; j < 2; ++j)
    if (!(r[j] > 1.0))
      throw ConfigurationError("contour radius r" + std::to_string(j + 1) + " = " + std::to_string(r[j]) +
                               " must exceed 1");
  if (const auto* f = std::get_if<LinearFractional2D>(&b.family())) {
    if (!(f->d + f->c(0) * r[0] + f->c(1) * r[1] > kDenominatorFloor * f->d))
      throw ConfigurationError("linear-fractional denominator vanishes on the polydisc of radii (r1, r2)");
  }
  for (int s = 0; s < kEnclosureSamples; ++s) {
    const Complex x = std::polar(r[0], 2.0 * std::numbers::pi * s / kEnclosureSamples);
    for (int t = 0; t < kEnclosureSamples; ++t) {
      const Complex y = std::polar(r[1], 2.0 * std::numbers::pi * t / kEnclosureSamples);
      for (int j = 0; j < 2; ++j)
        if (!(std::abs(b.evaluate(j, x, y)) < r[j]))
          throw ConfigurationError("|P_" + std::to_string(j + 1) + "| reaches r" + std::to_string(j + 1) +
                                   " on the torus of radii (" + std::to_string(r[0]) + ", " +
                                   std::to_string(r[1]) + ")");
    }
  }
}

Radii choose_radii(const BivariateOffspring& b) {
  require_subcritical(b);
  const double a1 = type_radius(b, 0);
  const double a2 = type_radius(b, 1);
  for (const Radii& candidate : {Radii{a1, a2}, Radii{a2, a1}}) {
    try {
      validate_radii(b, candidate);
      return candidate;
    } catch (const ConfigurationError&) {
    }
  }
  throw UnsupportedRegimeError("per-type radii (" + std::to_string(a1) + ", " + std::to_string(a2) +
                               ") fail the torus enclosure in either order");
}

}  // namespace qsd
