// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "qsd/baselines.hpp"
#include "qsd/cli.hpp"
#include "qsd/errors.hpp"
#include "qsd/lowrank.hpp"
#include "qsd/multitype.hpp"
#include "qsd/oracles.hpp"

using namespace qsd;

namespace {

using Clock = std::chrono::steady_clock;

const std::string kModels = QSD_MODELS_DIR;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

OffspringGF load_1d(const std::string& name) {
  return std::get<OffspringGF>(cli::load_model(kModels + "/" + name + ".json"));
}

BivariateOffspring load_2d(const std::string& name) {
  return std::get<BivariateOffspring>(cli::load_model(kModels + "/" + name + ".json"));
}

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

int failures = 0;

void report(const std::string& name, const std::function<Outcome()>& check) {
  Outcome o;
  const auto t = Clock::now();
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("%s %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), seconds_since(t));
  std::fflush(stdout);
}

QsdCoefficients dense(const OffspringGF& gf, std::size_t n) { return solve_dense(gf, make_contour(gf, n)); }

QsdCoefficients lowrank(const OffspringGF& gf, std::size_t n) {
  return solve_lowrank(gf, make_contour(gf, n), kDefaultTau);
}

// Relative moment disagreement for orders 2..5.
double moment_gap(const OffspringGF& gf, const QsdCoefficients& res) {
  const auto coef = moments_from_coefficients(res, 5);
  const auto rec = moments_from_recurrence(gf, coef.values[0], 5);
  double worst = 0.0;
  for (std::size_t h = 1; h < 5; ++h)
    worst = std::max(worst, std::abs(coef.values[h] - rec.values[h]) / std::abs(rec.values[h]));
  return worst;
}

struct TwoDErrors {
  double large = 0.0;  // oracle >= 1e-10
  double small = 0.0;  // 1e-16 <= oracle < 1e-10
};

TwoDErrors linfrac2d_errors(const QsdGrid& res, const LinearFractional2DQsd& oracle) {
  TwoDErrors e;
  for (Eigen::Index h = 0; h < res.g.rows(); ++h)
    for (Eigen::Index k = 0; k < res.g.cols(); ++k) {
      const double exact = oracle.coefficient(static_cast<int>(h), static_cast<int>(k));
      if (exact < 1e-16) continue;
      const double rel = std::abs(res.g(h, k) - exact) / exact;
      double& slot = exact >= 1e-10 ? e.large : e.small;
      slot = std::max(slot, rel);
    }
  return e;
}

}  // namespace

int main() {
  const auto ex1 = load_1d("example1_linfrac");
  const auto ex2 = load_1d("example2_poly");
  const auto ex3 = load_1d("example3_poly");

  report("criterion 1 (1D oracle, n=512 dense)", [&] {
    const auto t = Clock::now();
    const auto res = dense(ex1, 512);
    const double secs = seconds_since(t);
    double worst = 0.0;
    for (int j = 1; j < 512; ++j) {
      const double exact = linfrac_qsd(0.6, 0.3, j);
      if (exact >= 1e-14) worst = std::max(worst, std::abs(res.g(j) - exact) / exact);
    }
    return Outcome{worst <= 1e-10 && secs < 5.0, fmt("max rel err %.3g (<= 1e-10), %.2f s (< 5 s)", worst, secs)};
  });

  QsdCoefficients ex2_8192;
  report("criterion 2 (residual on Example 2, n=2048/8192 dense)", [&] {
    const auto a = dense(ex2, 2048);
    const auto t = Clock::now();
    ex2_8192 = dense(ex2, 8192);
    const double secs = seconds_since(t);
    const auto& b = ex2_8192;
    const bool ok = b.residual < a.residual && b.residual <= 1e-10 && std::abs(b.sum - 1.0) <= 1e-8 && secs < 60.0;
    return Outcome{ok, fmt("Res %.3g -> %.3g (<= 1e-10), |sum-1| %.3g (<= 1e-8), %.1f s (< 60 s)", a.residual,
                           b.residual, std::abs(b.sum - 1.0), secs)};
  });

  report("criterion 3 (Example 3: dense n=4096 degrades, low-rank n=131072 recovers)", [&] {
    const auto t = Clock::now();
    double most_negative = 0.0, dense_sum_gap = 0.0;
    {
      const auto d = dense(ex3, 4096);
      most_negative = d.g.minCoeff();
      dense_sum_gap = std::abs(d.sum - 1.0);
    }
    const auto lr = lowrank(ex3, 131072);
    const double secs = seconds_since(t);
    const bool negative_ok = most_negative < 0.0 && -most_negative >= 1e-6 && -most_negative <= 1e-4;
    const bool ok = negative_ok && dense_sum_gap > 1e-6 && std::abs(lr.sum - 1.0) <= 1e-6 && lr.residual <= 1e-9 &&
                    lr.rank < 500 && secs < 600.0;
    return Outcome{ok, fmt("dense: min g %.3g (in [-1e-4,-1e-6]), |sum-1| %.3g (> 1e-6); low-rank: |sum-1| %.3g "
                           "(<= 1e-6), Res %.3g (<= 1e-9), rank %d (< 500); %.0f s (< 600 s)",
                           most_negative, dense_sum_gap, std::abs(lr.sum - 1.0), lr.residual, lr.rank, secs)};
  });

  report("criterion 4 (decay envelope, Example 2 n=8192)", [&] {
    if (ex2_8192.g.size() == 0) ex2_8192 = dense(ex2, 8192);
    double C = 0.0;
    for (int j = 10; j <= 300; ++j) C = std::max(C, ex2_8192.g(j) / decay_envelope(ex2, j));
    return Outcome{C <= 10.0, fmt("max g_j psi^j over 10..300 = %.4g (<= 10), psi = %.6f", C, psi_p(ex2))};
  });

  report("criterion 5 (singular-value bounds, n=1000)", [&] {
    const auto t = Clock::now();
    std::string detail;
    bool ok = true;
    for (const char* name : {"example4_linfrac_p055", "example4_linfrac_p095"}) {
      const auto gf = load_1d(name);
      const ContourConfig cfg{1000, choose_radius(gf), true};
      const CauchyOracle oracle(gf, cfg);
      ComplexMatrix C(1000, 1000);
      ComplexVector row;
      for (Eigen::Index j = 0; j < 1000; ++j) {
        oracle.row(j, row);
        C.row(j) = row.transpose();
      }
      const RealVector s = singular_values(C);
      int checked = 0, violations = 0;
      for (Eigen::Index k = 0; k < s.size(); ++k) {
        if (s(k) / s(0) < 1e-14) break;
        ++checked;
        const int kk = static_cast<int>(k);
        if (s(k) > decay_bound_taylor(gf, cfg.r, 1000, kk) * (1 + 1e-12)) ++violations;
        if (s(k) / s(0) > decay_bound_zolotarev(gf, cfg.r, kk).bound * (1 + 1e-12)) ++violations;
      }
      ok = ok && violations == 0;
      detail += fmt("p0=%.2f: %d rows, %d violations; ", gf.p0(), checked, violations);
    }
    const double secs = seconds_since(t);
    ok = ok && secs < 120.0;
    return Outcome{ok, detail + fmt("%.1f s (< 120 s)", secs)};
  });

  report("criterion 6 (low-rank vs dense, Examples 1-2 n=512)", [&] {
    double worst = 0.0;
    for (const auto* gf : {&ex1, &ex2})
      worst = std::max(worst, (dense(*gf, 512).g - lowrank(*gf, 512).g).cwiseAbs().maxCoeff());
    return Outcome{worst <= 1e-10, fmt("max |dense - lowrank| %.3g (<= 1e-10)", worst)};
  });

  report("criterion 7 (2D linear-fractional oracle, n=64 dense and n=256 low-rank)", [&] {
    const auto t = Clock::now();
    const auto b = load_2d("example5_linfrac2d");
    const auto& lf = std::get<LinearFractional2D>(b.family());
    const auto oracle = linfrac2d_parameters(lf.S, lf.c, lf.b, lf.d);
    const auto d = linfrac2d_errors(solve_dense_2d(b, 64), oracle);
    const auto l = linfrac2d_errors(solve_lowrank_2d(b, 256, kDefaultTau), oracle);
    const double secs = seconds_since(t);
    const bool ok = d.large <= 1e-6 && d.small <= 1e-3 && l.large <= 1e-6 && l.small <= 1e-3 && secs < 300.0;
    return Outcome{ok, fmt("dense64 rel err %.3g (<= 1e-6) / %.3g (<= 1e-3); lowrank256 %.3g / %.3g; %.0f s (< 300 s)",
                           d.large, d.small, l.large, l.small, secs)};
  });

  report("criterion 8 (two-type polynomial model, n=256 low-rank)", [&] {
    const auto b = load_2d("example6_poly2d");
    const auto res = solve_lowrank_2d(b, 256, kDefaultTau);
    double outside = 0.0;
    for (Eigen::Index h = 0; h < res.g.rows(); ++h)
      for (Eigen::Index k = 0; k < res.g.cols(); ++k)
        if (h >= 64 || k >= 64) outside = std::max(outside, res.g(h, k));
    const double most_negative = res.g.minCoeff();
    const bool ok = std::abs(res.rho - 0.5884) <= 1e-3 && std::abs(res.r1 - 1.2462) <= 1e-3 &&
                    std::abs(res.r2 - 1.4104) <= 1e-3 && std::abs(res.sum - 1.0) <= 1e-6 &&
                    most_negative >= -1e-10 && outside <= 1e-20;
    return Outcome{ok, fmt("rho %.5f, r = (%.4f, %.4f), |sum-1| %.3g (<= 1e-6), min g %.3g (>= -1e-10), "
                           "max g outside 64x64 %.3g (<= 1e-20), rank %d; n=512 not run (memory)",
                           res.rho, res.r1, res.r2, std::abs(res.sum - 1.0), most_negative, outside, res.rank)};
  });

  report("criterion 9 (baseline failure modes, Example 1)", [&] {
    const auto fit = interpolation_baseline(ex1, 200, 12);
    double interp_err = 0.0;
    for (int j = 1; j <= 12; ++j) {
      const double exact = linfrac_qsd(0.6, 0.3, j);
      interp_err = std::max(interp_err, std::abs(fit.g(j) - exact) / exact);
    }
    std::vector<double> reference(1025, 0.0);
    for (int j = 1; j <= 1024; ++j) reference[static_cast<std::size_t>(j)] = linfrac_qsd(0.6, 0.3, j);
    bool sim_ok = true;
    std::string detail = fmt("interp max rel err %.3g (>= 1e-2)", interp_err);
    for (std::uint64_t seed : {1, 2, 3}) {
      SimulationConfig cfg;
      cfg.generations = 1000000;
      cfg.seed = seed;
      const auto emp = simulate_returned_process(ex1, cfg);
      const double tv = total_variation(emp, reference);
      int first_zero = 0;
      for (int j = 1; j <= 40 && first_zero == 0; ++j)
        if (emp.counts[static_cast<std::size_t>(j)] == 0) first_zero = j;
      sim_ok = sim_ok && tv <= 0.01 && first_zero > 0;
      detail += fmt("; seed %llu TV %.4f (<= 0.01), first zero j %d (<= 40)", static_cast<unsigned long long>(seed), tv,
                    first_zero);
    }
    return Outcome{interp_err >= 1e-2 && sim_ok, detail};
  });

  report("criterion 10 (moment cross-validation, Examples 1-2)", [&] {
    if (ex2_8192.g.size() == 0) ex2_8192 = dense(ex2, 8192);
    const double gap1 = moment_gap(ex1, dense(ex1, 512));
    const double gap2 = moment_gap(ex2, ex2_8192);
    return Outcome{gap1 <= 1e-8 && gap2 <= 1e-8,
                   fmt("max rel diff h=2..5: Example 1 (n=512) %.3g, Example 2 (n=8192) %.3g (<= 1e-8)", gap1, gap2)};
  });

  report("timing shape (low-rank, Example 3, n=16384 -> 65536)", [&] {
    auto timed = [&](std::size_t n) {
      const auto t = Clock::now();
      const auto res = lowrank(ex3, n);
      return std::pair{seconds_since(t), res.rank};
    };
    const auto [t1, k1] = timed(16384);
    const auto [t2, k2] = timed(65536);
    const double limit = 2.0 * 16.0;
    return Outcome{t2 / t1 < limit,
                   fmt("t1 %.2f s (rank %d), t2 %.2f s (rank %d), ratio %.2f (< %.0f)", t1, k1, t2, k2, t2 / t1, limit)};
  });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
