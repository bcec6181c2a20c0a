#include <Eigen/Core>
#include <chrono>
#include <fstream>
#include <iostream>
#include <new>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "qsd/baselines.hpp"
#include "qsd/cli.hpp"
#include "qsd/errors.hpp"
#include "qsd/lowrank.hpp"
#include "qsd/oracles.hpp"

namespace qsd::cli {

namespace {

using nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

struct Common {
  std::string model;
  bool renormalize = false;
  std::string out = "-";
  std::string meta;
};

struct SolveArgs {
  std::size_t n = 512;
  std::optional<double> r, r1, r2;
  std::string method = "dense";
  double tau = kDefaultTau;
  int max_rank = -1;
};

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// Writes the CSV to --out (stdout for "-") and the metadata to --meta,
// <out>.json, or one line on stderr when the CSV went to stdout.
class Sink {
 public:
  Sink(const Common& c, std::ostream& out) : common_(c), out_(out) {}

  void write(const std::string& csv, const ordered_json& meta) const {
    if (common_.out == "-") {
      out_ << csv;
    } else {
      write_file(common_.out, csv);
    }
    const std::string path = !common_.meta.empty() ? common_.meta : (common_.out == "-" ? "" : common_.out + ".json");
    if (path.empty())
      std::cerr << meta.dump() << '\n';
    else
      write_file(path, meta.dump(2) + "\n");
  }

 private:
  static void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigurationError("cannot open output file " + path);
    f << text;
    if (!f) throw ConfigurationError("failed writing output file " + path);
  }

  const Common& common_;
  std::ostream& out_;
};

const OffspringGF& require_1d(const Model& model, const char* command) {
  if (const auto* gf = std::get_if<OffspringGF>(&model)) return *gf;
  throw ConfigurationError(std::string(command) + " supports single-type models only");
}

std::optional<Radii> radii_from(const SolveArgs& a) {
  if (a.r1.has_value() != a.r2.has_value()) throw ConfigurationError("--r1 and --r2 must be given together");
  if (a.r1) return Radii{*a.r1, *a.r2};
  return std::nullopt;
}

QsdCoefficients solve_1d(const OffspringGF& gf, const SolveArgs& a) {
  if (a.r1 || a.r2) throw ConfigurationError("--r1 and --r2 apply to two-type models; use --r");
  const auto cfg = make_contour(gf, a.n, a.r);
  if (a.method == "dense") return solve_dense(gf, cfg);
  return solve_lowrank(gf, cfg, a.tau, a.max_rank);
}

QsdGrid solve_2d(const BivariateOffspring& b, const SolveArgs& a) {
  if (a.r) throw ConfigurationError("--r applies to single-type models; use --r1 and --r2");
  if (a.method == "dense") return solve_dense_2d(b, a.n, radii_from(a));
  return solve_lowrank_2d(b, a.n, a.tau, radii_from(a), a.max_rank);
}

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("model", c.model, "Model file (JSON)")->required();
  cmd->add_flag("--renormalize", c.renormalize, "Divide probability vectors by their sums instead of rejecting them");
  cmd->add_option("--out", c.out, "CSV output path, - for stdout");
  cmd->add_option("--meta", c.meta, "JSON metadata path (default <out>.json)");
}

void add_solver(CLI::App* cmd, SolveArgs& a, bool with_method) {
  cmd->add_option("--n", a.n, "Number of nodes per dimension (power of two)");
  cmd->add_option("--r", a.r, "Contour radius (single-type)");
  cmd->add_option("--r1", a.r1, "Radius for type 1 (two-type)");
  cmd->add_option("--r2", a.r2, "Radius for type 2 (two-type)");
  if (with_method)
    cmd->add_option("--method", a.method, "dense or lowrank")->check(CLI::IsMember({"dense", "lowrank"}));
  cmd->add_option("--tau", a.tau, "ACA tolerance");
  cmd->add_option("--max-rank", a.max_rank, "ACA rank cap (-1 for the default)");
}

// ---------------------------------------------------------------- solve

int cmd_solve(const Common& c, const SolveArgs& a, std::ostream& out) {
  const Model model = load_model(c.model, c.renormalize);
  const auto start = Clock::now();
  std::ostringstream csv;
  ordered_json meta;
  if (const auto* gf = std::get_if<OffspringGF>(&model)) {
    const auto res = solve_1d(*gf, a);
    const double ms = elapsed_ms(start);
    csv << "j,g_j\n";
    for (Eigen::Index j = 1; j < res.g.size(); ++j) csv << j << ',' << format_double(res.g(j)) << '\n';
    meta = {{"n", res.n},           {"r", res.r},         {"residual", res.residual},
            {"sum", res.sum},       {"imag_leak", res.imag_leak}, {"rank", res.rank},
            {"wall_time_ms", ms},   {"method", std::string(method_name(res.method))}};
    if (res.rank_truncated) meta["rank_truncated"] = true;
  } else {
    const auto res = solve_2d(std::get<BivariateOffspring>(model), a);
    const double ms = elapsed_ms(start);
    csv << "h,k,g_hk\n";
    for (Eigen::Index h = 0; h < res.g.rows(); ++h)
      for (Eigen::Index k = 0; k < res.g.cols(); ++k)
        if (std::abs(res.g(h, k)) > 1e-300) csv << h << ',' << k << ',' << format_double(res.g(h, k)) << '\n';
    meta = {{"n", res.n},         {"r1", res.r1},       {"r2", res.r2},
            {"rho", res.rho},     {"residual", res.residual}, {"sum", res.sum},
            {"imag_leak", res.imag_leak}, {"rank", res.rank}, {"wall_time_ms", ms},
            {"method", std::string(method_name(res.method))}};
    if (res.rank_truncated) meta["rank_truncated"] = true;
  }
  Sink(c, out).write(csv.str(), meta);
  return kExitOk;
}

// -------------------------------------------------------------- compare

struct CompareArgs {
  std::string methods = "dense,lowrank,returnmap,interp";
  std::string oracle = "auto";
  int jmax = -1;
  std::int64_t generations = 1000000;
  std::uint64_t seed = 1;
  int K = 200;
  int degree = 12;
};

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::string rel_err(double exact, double approx) {
  return exact != 0.0 ? format_double(std::abs((exact - approx) / exact)) : "";
}

int compare_1d(const OffspringGF& gf, const Common& c, const SolveArgs& a, const CompareArgs& ca,
               const std::vector<std::string>& methods, std::ostream& out) {
  const auto* lf = std::get_if<LinearFractionalGF>(&gf.family());
  const bool with_oracle = ca.oracle == "auto" && lf != nullptr;
  const int rows = ca.jmax > 0 ? ca.jmax : static_cast<int>(a.n) - 1;

  std::vector<std::vector<double>> columns;
  ordered_json meta = {{"n", a.n}, {"methods", methods}, {"oracle", with_oracle}};
  for (const auto& m : methods) {
    const auto start = Clock::now();
    std::vector<double> col;
    if (m == "dense" || m == "lowrank") {
      SolveArgs sa = a;
      sa.method = m;
      const auto res = solve_1d(gf, sa);
      col.assign(res.g.data(), res.g.data() + res.g.size());
      meta[m] = {{"r", res.r}, {"residual", res.residual}, {"sum", res.sum}, {"rank", res.rank}};
    } else if (m == "returnmap") {
      SimulationConfig cfg;
      cfg.generations = ca.generations;
      cfg.seed = ca.seed;
      cfg.max_state_tracked = std::max(rows, 1024);
      const auto emp = simulate_returned_process(gf, cfg);
      col = emp.probabilities();
      meta[m] = {{"generations", cfg.generations}, {"seed", cfg.seed}, {"overflow", emp.overflow}};
    } else {
      const auto res = interpolation_baseline(gf, ca.K, ca.degree);
      col.assign(res.g.data(), res.g.data() + res.g.size());
      meta[m] = {{"K", ca.K}, {"degree", ca.degree}, {"ill_conditioned", res.ill_conditioned}};
    }
    meta[m]["wall_time_ms"] = elapsed_ms(start);
    columns.push_back(std::move(col));
  }

  std::ostringstream csv;
  csv << 'j';
  for (const auto& m : methods) csv << ',' << m;
  if (with_oracle) {
    csv << ",oracle";
    for (const auto& m : methods) csv << ",rel_err_" << m;
  }
  csv << '\n';
  for (int j = 1; j <= rows; ++j) {
    const auto idx = static_cast<std::size_t>(j);
    csv << j;
    for (const auto& col : columns) csv << ',' << (idx < col.size() ? format_double(col[idx]) : "");
    if (with_oracle) {
      const double exact = linfrac_qsd(lf->p0, lf->p, j);
      csv << ',' << format_double(exact);
      for (const auto& col : columns) csv << ',' << (idx < col.size() ? rel_err(exact, col[idx]) : "");
    }
    csv << '\n';
  }
  Sink(c, out).write(csv.str(), meta);
  return kExitOk;
}

int compare_2d(const BivariateOffspring& b, const Common& c, const SolveArgs& a, const CompareArgs& ca,
               const std::vector<std::string>& methods, std::ostream& out) {
  std::optional<LinearFractional2DQsd> oracle;
  if (const auto* lf = std::get_if<LinearFractional2D>(&b.family()); lf && ca.oracle == "auto")
    oracle = linfrac2d_parameters(lf->S, lf->c, lf->b, lf->d);
  const int side = ca.jmax > 0 ? std::min<int>(ca.jmax, static_cast<int>(a.n)) : static_cast<int>(a.n);

  std::vector<RealMatrix> grids;
  ordered_json meta = {{"n", a.n}, {"methods", methods}, {"oracle", oracle.has_value()}};
  for (const auto& m : methods) {
    if (m != "dense" && m != "lowrank")
      throw ConfigurationError("method " + m + " is available for single-type models only");
    SolveArgs sa = a;
    sa.method = m;
    const auto start = Clock::now();
    const auto res = solve_2d(b, sa);
    meta[m] = {{"r1", res.r1},     {"r2", res.r2},   {"residual", res.residual},
               {"sum", res.sum},   {"rank", res.rank}, {"wall_time_ms", elapsed_ms(start)}};
    grids.push_back(res.g);
  }

  std::ostringstream csv;
  csv << "h,k";
  for (const auto& m : methods) csv << ',' << m;
  if (oracle) {
    csv << ",oracle";
    for (const auto& m : methods) csv << ",rel_err_" << m;
  }
  csv << '\n';
  for (int h = 0; h < side; ++h)
    for (int k = 0; k < side; ++k) {
      if (h == 0 && k == 0) continue;
      csv << h << ',' << k;
      for (const auto& g : grids) csv << ',' << format_double(g(h, k));
      if (oracle) {
        const double exact = oracle->coefficient(h, k);
        csv << ',' << format_double(exact);
        for (const auto& g : grids) csv << ',' << rel_err(exact, g(h, k));
      }
      csv << '\n';
    }
  Sink(c, out).write(csv.str(), meta);
  return kExitOk;
}

int cmd_compare(const Common& c, const SolveArgs& a, const CompareArgs& ca, std::ostream& out) {
  const auto methods = split(ca.methods);
  if (methods.empty()) throw ConfigurationError("--methods needs at least one method");
  for (const auto& m : methods)
    if (m != "dense" && m != "lowrank" && m != "returnmap" && m != "interp")
      throw ConfigurationError("unknown method " + m + " (expected dense, lowrank, returnmap or interp)");
  const Model model = load_model(c.model, c.renormalize);
  if (const auto* gf = std::get_if<OffspringGF>(&model)) return compare_1d(*gf, c, a, ca, methods, out);
  return compare_2d(std::get<BivariateOffspring>(model), c, a, ca, methods, out);
}

// --------------------------------------------------------------- bounds

inline constexpr std::size_t kMaxBoundsNodes = 2000;

int cmd_bounds(const Common& c, std::size_t n, std::optional<double> r, int kmax, std::ostream& out) {
  const Model model = load_model(c.model, c.renormalize);
  const OffspringGF& gf = require_1d(model, "bounds");
  require_subcritical(gf);
  if (n < 1 || n > kMaxBoundsNodes)
    throw ConfigurationError("bounds needs 1 <= n <= " + std::to_string(kMaxBoundsNodes) + " (dense SVD), got " +
                             std::to_string(n));
  const auto start = Clock::now();
  ContourConfig cfg{n, r ? *r : choose_radius(gf), !r.has_value()};
  const CauchyOracle oracle(gf, cfg);
  ComplexMatrix C(oracle.rows(), oracle.cols());
  ComplexVector row;
  for (Eigen::Index j = 0; j < C.rows(); ++j) {
    oracle.row(j, row);
    C.row(j) = row.transpose();
  }
  const RealVector s = singular_values(C);
  const int last = kmax >= 0 ? std::min<int>(kmax, static_cast<int>(s.size()) - 1) : static_cast<int>(s.size()) - 1;

  std::ostringstream csv;
  csv << "k,sigma_k,sigma_k_rel,bound_taylor,bound_zolotarev\n";
  for (int k = 0; k <= last; ++k) {
    csv << k << ',' << format_double(s(k)) << ',' << format_double(s(k) / s(0)) << ','
        << format_double(decay_bound_taylor(gf, cfg.r, n, k)) << ','
        << format_double(decay_bound_zolotarev(gf, cfg.r, k).bound) << '\n';
  }
  const auto z = decay_bound_zolotarev(gf, cfg.r, 0);
  const ordered_json meta = {{"n", n},           {"r", cfg.r},         {"alpha", z.alpha},
                             {"beta", z.beta},   {"theta", z.theta},   {"wall_time_ms", elapsed_ms(start)}};
  Sink(c, out).write(csv.str(), meta);
  return kExitOk;
}

// ------------------------------------------------------------- simulate

int cmd_simulate(const Common& c, const SimulationConfig& cfg, std::ostream& out) {
  const Model model = load_model(c.model, c.renormalize);
  const OffspringGF& gf = require_1d(model, "simulate");
  const auto start = Clock::now();
  const auto emp = simulate_returned_process(gf, cfg);
  const double ms = elapsed_ms(start);
  const auto p = emp.probabilities();

  const auto* lf = std::get_if<LinearFractionalGF>(&gf.family());
  std::vector<double> reference;
  if (lf) {
    reference.assign(p.size(), 0.0);
    for (std::size_t j = 1; j < p.size(); ++j) reference[j] = linfrac_qsd(lf->p0, lf->p, static_cast<int>(j));
  }
  std::size_t last = 1;
  for (std::size_t j = 1; j < p.size(); ++j)
    if (emp.counts[j] > 0) last = j;

  std::ostringstream csv;
  csv << "j,count,probability" << (lf ? ",oracle" : "") << '\n';
  for (std::size_t j = 1; j <= last; ++j) {
    csv << j << ',' << emp.counts[j] << ',' << format_double(p[j]);
    if (lf) csv << ',' << format_double(reference[j]);
    csv << '\n';
  }
  ordered_json meta = {{"generations", cfg.generations}, {"seed", cfg.seed},       {"initial_state", cfg.initial_state},
                       {"total", emp.total},             {"overflow", emp.overflow}, {"wall_time_ms", ms}};
  if (lf) meta["tv"] = total_variation(emp, reference);
  Sink(c, out).write(csv.str(), meta);
  return kExitOk;
}

// -------------------------------------------------------------- moments

int cmd_moments(const Common& c, const SolveArgs& a, int H, std::ostream& out) {
  const Model model = load_model(c.model, c.renormalize);
  const OffspringGF& gf = require_1d(model, "moments");
  if (H < 1) throw ConfigurationError("--H must be at least 1");
  const auto start = Clock::now();
  const auto res = solve_1d(gf, a);
  const auto coef = moments_from_coefficients(res, H);
  const auto rec = moments_from_recurrence(gf, coef.values[0], H);

  std::ostringstream csv;
  csv << "h,from_coefficients,from_recurrence,rel_diff\n";
  for (int h = 1; h <= H; ++h) {
    const double x = coef.values[static_cast<std::size_t>(h - 1)];
    const double y = rec.values[static_cast<std::size_t>(h - 1)];
    const double scale = std::max(std::abs(x), std::abs(y));
    csv << h << ',' << format_double(x) << ',' << format_double(y) << ','
        << format_double(scale > 0.0 ? std::abs(x - y) / scale : 0.0) << '\n';
  }
  const ordered_json meta = {{"n", res.n},
                             {"r", res.r},
                             {"residual", res.residual},
                             {"sum", res.sum},
                             {"tail_converged", coef.tail_converged},
                             {"precision_warning", rec.precision_warning},
                             {"wall_time_ms", elapsed_ms(start)}};
  Sink(c, out).write(csv.str(), meta);
  return kExitOk;
}

std::string one_line(std::string s) {
  for (char& ch : s)
    if (ch == '\n' || ch == '\r') ch = ' ';
  return s;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  if (const int threads = threads_from_env(); threads > 0) Eigen::setNbThreads(threads);

  CLI::App app{"Quasi-stationary distributions of subcritical Galton-Watson processes"};
  app.require_subcommand(1);

  Common common;
  SolveArgs solve;
  CompareArgs compare;
  SimulationConfig sim;
  std::size_t bounds_n = 1000;
  int kmax = -1;
  int H = 5;

  auto* s = app.add_subcommand("solve", "Compute the quasi-stationary coefficients");
  add_common(s, common);
  add_solver(s, solve, true);

  auto* cmp = app.add_subcommand("compare", "Tabulate several methods side by side");
  add_common(cmp, common);
  add_solver(cmp, solve, false);
  cmp->add_option("--methods", compare.methods, "Comma list of dense, lowrank, returnmap, interp");
  cmp->add_option("--oracle", compare.oracle, "auto or none")->check(CLI::IsMember({"auto", "none"}));
  cmp->add_option("--jmax", compare.jmax, "Rows to print (per dimension for two-type models)");
  cmp->add_option("--generations", compare.generations, "Simulation length for returnmap");
  cmp->add_option("--seed", compare.seed, "Simulation seed for returnmap");
  cmp->add_option("--K", compare.K, "Extinction-sequence length for interp");
  cmp->add_option("--degree", compare.degree, "Polynomial degree for interp");

  auto* bnd = app.add_subcommand("bounds", "Singular values of the Cauchy matrix against their bounds");
  add_common(bnd, common);
  bnd->add_option("--n", bounds_n, "Number of nodes (at most 2000)");
  bnd->add_option("--r", solve.r, "Contour radius");
  bnd->add_option("--kmax", kmax, "Last k to print (-1 for all)");

  auto* simc = app.add_subcommand("simulate", "Run the returned process");
  add_common(simc, common);
  simc->add_option("--generations", sim.generations, "Number of generations");
  simc->add_option("--seed", sim.seed, "Random seed");
  simc->add_option("--initial-state", sim.initial_state, "Population at time 0");
  simc->add_option("--width", sim.max_state_tracked, "Largest state kept in the histogram");

  auto* mom = app.add_subcommand("moments", "Factorial moments from coefficients and from the recurrence");
  add_common(mom, common);
  add_solver(mom, solve, true);
  mom->add_option("--H", H, "Highest moment order");

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return kExitOk;
    } catch (const CLI::ParseError& e) {
      err << "error: usage: " << one_line(e.what()) << '\n';
      return kExitValidation;
    }
    if (app.got_subcommand(s)) return cmd_solve(common, solve, out);
    if (app.got_subcommand(cmp)) return cmd_compare(common, solve, compare, out);
    if (app.got_subcommand(bnd)) return cmd_bounds(common, bounds_n, solve.r, kmax, out);
    if (app.got_subcommand(simc)) return cmd_simulate(common, sim, out);
    return cmd_moments(common, solve, H, out);
  } catch (const Error& e) {
    const bool numerical = e.category() == ErrorCategory::Numerical;
    err << "error: " << (numerical ? "numerical" : "validation") << ": " << one_line(e.what()) << '\n';
    return numerical ? kExitNumerical : kExitValidation;
  } catch (const std::bad_alloc&) {
    err << "error: numerical: out of memory\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: internal: " << one_line(e.what()) << '\n';
    return kExitUsage;
  }
}

}  // namespace qsd::cli
