#include "qsd/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <variant>

#include "qsd/errors.hpp"

namespace qsd {

namespace {

constexpr double kTwoPow53 = 9007199254740992.0;

class Uniform {
 public:
  explicit Uniform(std::uint64_t seed) : engine_(seed) {}

  /// In [0, 1).
  double next() { return static_cast<double>(engine_() >> 11) / kTwoPow53; }

 private:
  std::mt19937_64 engine_;
};

// Offspring count sampler for one individual.
class OffspringSampler {
 public:
  explicit OffspringSampler(const OffspringGF& gf) {
    if (const auto* poly = std::get_if<PolynomialGF>(&gf.family())) {
      double acc = 0.0;
      for (double p : poly->coeffs) cumulative_.push_back(acc += p);
      cumulative_.back() = 1.0;
    } else {
      const auto& lf = std::get<LinearFractionalGF>(gf.family());
      p0_ = lf.p0;
      log_p_ = lf.p > 0.0 ? std::log(lf.p) : 0.0;
      geometric_ = lf.p > 0.0;
    }
  }

  std::int64_t draw(Uniform& u) const {
    if (!cumulative_.empty()) {
      const double x = u.next();
      return std::upper_bound(cumulative_.begin(), cumulative_.end(), x) - cumulative_.begin();
    }
    if (u.next() < p0_) return 0;
    if (!geometric_) return 1;
    // 1 + number of failures before the first success, P(k) = (1 - p) p^k.
    const double x = 1.0 - u.next();  // (0, 1]
    return 1 + static_cast<std::int64_t>(std::floor(std::log(x) / log_p_));
  }

 private:
  std::vector<double> cumulative_;
  double p0_ = 0.0;
  double log_p_ = 0.0;
  bool geometric_ = false;
};

// Fenwick tree over states 1..width, for sampling proportional to counts.
class Fenwick {
 public:
  explicit Fenwick(std::int64_t width) : tree_(static_cast<std::size_t>(width) + 1, 0) {}

  void add(std::int64_t state) {
    for (auto i = static_cast<std::size_t>(state); i < tree_.size(); i += i & (~i + 1)) ++tree_[i];
  }

  /// Smallest state whose prefix count exceeds target, target < total.
  std::int64_t find(std::int64_t target) const {
    std::size_t pos = 0;
    std::size_t step = 1;
    while (step * 2 < tree_.size()) step *= 2;
    for (; step > 0; step /= 2) {
      if (pos + step < tree_.size() && tree_[pos + step] <= target) {
        pos += step;
        target -= tree_[pos];
      }
    }
    return static_cast<std::int64_t>(pos) + 1;
  }

 private:
  std::vector<std::int64_t> tree_;
};

}  // namespace

std::vector<double> EmpiricalDistribution::probabilities() const {
  std::vector<double> out(counts.size(), 0.0);
  if (total == 0) return out;
  for (std::size_t j = 0; j < counts.size(); ++j) out[j] = static_cast<double>(counts[j]) / static_cast<double>(total);
  return out;
}

EmpiricalDistribution simulate_returned_process(const OffspringGF& gf, const SimulationConfig& cfg) {
  require_subcritical(gf);
  if (cfg.generations < 1) throw ConfigurationError("simulation needs at least one generation");
  if (cfg.initial_state < 1) throw ConfigurationError("initial state must be at least 1");
  if (cfg.max_state_tracked < 1) throw ConfigurationError("histogram width must be at least 1");

  const OffspringSampler sampler(gf);
  Uniform u(cfg.seed);
  Fenwick tree(cfg.max_state_tracked);
  std::vector<std::int64_t> overflow_visits;

  EmpiricalDistribution out;
  out.counts.assign(static_cast<std::size_t>(cfg.max_state_tracked) + 1, 0);
  auto record = [&](std::int64_t state) {
    if (state <= cfg.max_state_tracked) {
      ++out.counts[static_cast<std::size_t>(state)];
      tree.add(state);
    } else {
      ++out.overflow;
      overflow_visits.push_back(state);
    }
    ++out.total;
  };

  std::int64_t state = cfg.initial_state;
  record(state);
  for (std::int64_t t = 0; t < cfg.generations; ++t) {
    std::int64_t next = 0;
    for (std::int64_t i = 0; i < state; ++i) next += sampler.draw(u);
    if (next == 0) {
      const auto target = static_cast<std::int64_t>(u.next() * static_cast<double>(out.total));
      const std::int64_t tracked = out.total - out.overflow;
      if (target < tracked)
        next = tree.find(target);
      else
        next = overflow_visits[static_cast<std::size_t>(target - tracked)];
    }
    state = next;
    record(state);
  }
  return out;
}

double total_variation(const EmpiricalDistribution& empirical, const std::vector<double>& reference) {
  const auto p = empirical.probabilities();
  double diff = 0.0;
  double ref_tracked = 0.0;
  for (std::size_t j = 1; j < p.size(); ++j) {
    const double q = j < reference.size() ? reference[j] : 0.0;
    diff += std::abs(p[j] - q);
    ref_tracked += q;
  }
  double ref_total = 0.0;
  for (std::size_t j = 1; j < reference.size(); ++j) ref_total += reference[j];
  const double overflow = empirical.total ? static_cast<double>(empirical.overflow) / empirical.total : 0.0;
  return 0.5 * (diff + overflow + std::max(0.0, ref_total - ref_tracked));
}

std::vector<std::pair<double, double>> extinction_sequence(const OffspringGF& gf, int K) {
  if (K < 1) throw ConfigurationError("extinction sequence length K must be at least 1");
  const double m = gf.mean();
  std::vector<std::pair<double, double>> out;
  out.reserve(static_cast<std::size_t>(K));
  double z = 0.0;
  double mk = 1.0;
  for (int k = 0; k < K; ++k) {
    out.emplace_back(z, 1.0 - mk);
    z = gf.evaluate(z);
    mk *= m;
  }
  return out;
}

QsdCoefficients interpolation_baseline(const OffspringGF& gf, int K, int degree) {
  require_subcritical(gf);
  if (degree < 1) throw ConfigurationError("fit degree must be at least 1");
  if (K < degree + 1)
    throw ConfigurationError("interpolation needs K >= degree + 1 points (K = " + std::to_string(K) +
                             ", degree = " + std::to_string(degree) + ")");
  const auto seq = extinction_sequence(gf, K);
  std::vector<double> xs, ys;
  for (const auto& [z, value] : seq) {
    xs.push_back(z);
    ys.push_back(value);
  }
  const PolyFit fit = polyfit_real(xs, ys, degree);

  QsdCoefficients out;
  out.g = fit.coefficients;
  out.g(0) = 0.0;
  out.n = static_cast<std::size_t>(degree) + 1;
  out.method = Method::Baseline;
  out.ill_conditioned = fit.ill_conditioned;
  finalize(out, gf);
  return out;
}

}  // namespace qsd
