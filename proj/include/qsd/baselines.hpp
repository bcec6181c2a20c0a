#pragma once

// Comparison methods: the returned-process simulation and polynomial fitting
// through the extinction-probability sequence.

#include <cstdint>
#include <utility>
#include <vector>

#include "qsd/dense_solver.hpp"
#include "qsd/genfun.hpp"

namespace qsd {

/// Random numbers come from std::mt19937_64 seeded with `seed`. Uniform
/// doubles are (x >> 11) * 2^-53, so runs are reproducible across platforms.
struct SimulationConfig {
  std::int64_t generations = 1000000;
  std::int64_t initial_state = 1;
  std::uint64_t seed = 1;
  std::int64_t max_state_tracked = 1024;
};

/// Visit counts of the returned process. counts[j] is the number of recorded
/// generations spent in state j (counts[0] stays 0); states above the
/// histogram width land in `overflow`.
struct EmpiricalDistribution {
  std::vector<std::int64_t> counts;
  std::int64_t overflow = 0;
  std::int64_t total = 0;

  /// counts[j] / total.
  std::vector<double> probabilities() const;
};

/// Runs the returned process. The initial state is recorded at time 0; each
/// generation records the next state. On extinction the transition to 0 is
/// not recorded and the next state is drawn from the visit counts so far.
EmpiricalDistribution simulate_returned_process(const OffspringGF& gf, const SimulationConfig& cfg);

/// 0.5 sum_j |p_j - q_j| over tracked states j >= 1, plus half of the
/// overflow mass and of the reference mass beyond the histogram.
double total_variation(const EmpiricalDistribution& empirical, const std::vector<double>& reference);

/// Pairs (z_k, 1 - m^k), k = 0..K-1, with z_0 = 0 and z_{k+1} = P(z_k).
std::vector<std::pair<double, double>> extinction_sequence(const OffspringGF& gf, int K);

/// Least-squares polynomial of the given degree through the extinction
/// sequence. Returns coefficients 1..degree (g_0 is set to 0) with the
/// fit's ill-conditioning flag.
QsdCoefficients interpolation_baseline(const OffspringGF& gf, int K = 200, int degree = 12);

}  // namespace qsd
