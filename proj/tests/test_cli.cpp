#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "qsd/cli.hpp"
#include "qsd/errors.hpp"
#include "qsd/lowrank.hpp"

using namespace qsd;
namespace fs = std::filesystem;

namespace {

const std::string kModels = QSD_MODELS_DIR;

std::string model(const std::string& name) { return kModels + "/" + name + ".json"; }

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "qsd");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch() {
  const auto dir = fs::temp_directory_path() / ("qsd_cli_test_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

nlohmann::json sidecar(const fs::path& csv) { return nlohmann::json::parse(slurp(csv.string() + ".json")); }

// CSV body as rows of fields, header dropped.
std::vector<std::vector<std::string>> rows(const std::string& csv) {
  std::vector<std::vector<std::string>> out;
  std::stringstream ss(csv);
  std::string line;
  std::getline(ss, line);
  while (std::getline(ss, line)) {
    std::vector<std::string> fields;
    std::stringstream ls(line);
    std::string f;
    while (std::getline(ls, f, ',')) fields.push_back(f);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    out.push_back(fields);
  }
  return out;
}

std::string header(const std::string& csv) { return csv.substr(0, csv.find('\n')); }

}  // namespace

TEST(ModelParsing, AllFamilies) {
  EXPECT_TRUE(std::holds_alternative<OffspringGF>(cli::parse_model(R"({"type":"linfrac","p0":0.6,"p":0.3})")));
  EXPECT_TRUE(std::holds_alternative<OffspringGF>(cli::parse_model(R"({"type":"polynomial","coeffs":[0.5,0.3,0.2]})")));
  EXPECT_TRUE(std::holds_alternative<BivariateOffspring>(cli::load_model(model("example5_linfrac2d"))));
  const auto m = cli::load_model(model("example6_poly2d"));
  ASSERT_TRUE(std::holds_alternative<BivariateOffspring>(m));
  EXPECT_NEAR(std::get<BivariateOffspring>(m).rho(), 0.5884, 1e-3);
}

TEST(ModelParsing, GridIsRowMajor) {
  const auto m = cli::parse_model(
      R"({"type":"polynomial2d","degrees":[1,2],"coeffs1":[0.5,0.1,0.1,0.1,0.1,0.1],"coeffs2":[0.6,0.2,0,0.2,0,0]})");
  const auto& b = std::get<BivariateOffspring>(m);
  // P2(x, y) = 0.6 + 0.2 y + 0.2 x.
  EXPECT_NEAR(b.evaluate(1, 0.5, 0.0), 0.7, 1e-15);
  EXPECT_NEAR(b.evaluate(1, 0.0, 0.5), 0.7, 1e-15);
}

TEST(ModelParsing, BundledModelsLoad) {
  for (const auto& entry : fs::directory_iterator(kModels)) EXPECT_NO_THROW(cli::load_model(entry.path().string()));
}

TEST(ModelParsing, Rejections) {
  EXPECT_THROW(cli::parse_model("{not json"), ValidationError);
  EXPECT_THROW(cli::parse_model("[1,2]"), ValidationError);
  EXPECT_THROW(cli::parse_model(R"({"type":"weibull"})"), ValidationError);
  EXPECT_THROW(cli::parse_model(R"({"type":"linfrac","p0":0.6})"), ValidationError);
  EXPECT_THROW(cli::parse_model(R"({"type":"linfrac","p0":"a","p":0.3})"), ValidationError);
  EXPECT_THROW(cli::parse_model(R"({"type":"polynomial2d","degrees":[1,1],"coeffs1":[1],"coeffs2":[1]})"),
               ValidationError);
  EXPECT_THROW(cli::parse_model(R"({"type":"linfrac2d","S":[[1,2]],"c":[0,0],"b":[0,0],"d":1})"), ValidationError);
  EXPECT_THROW(cli::load_model("/nonexistent/model.json"), ConfigurationError);
}

TEST(ModelParsing, RenormalizeIsExplicit) {
  const char* doc = R"({"type":"polynomial","coeffs":[1.0,0.6,0.4]})";
  EXPECT_THROW(cli::parse_model(doc), ValidationError);
  const auto m = cli::parse_model(doc, true);
  EXPECT_NEAR(std::get<OffspringGF>(m).mean(), 0.7, 1e-15);
}

TEST(ModelParsing, AffineLaw) {
  const auto m = cli::parse_model(R"({"type":"polynomial","coeffs":[0.6,0.4],"affine":true})");
  EXPECT_TRUE(std::get<OffspringGF>(m).is_affine());
}

TEST(Formatting, SeventeenDigitsRoundTrip) {
  for (double x : {0.1, 1.0 / 3.0, 2.0 / 3.0, 1e-300, -4.9406564584124654e-324, 123456789.123456789}) {
    const auto s = cli::format_double(x);
    EXPECT_EQ(std::strtod(s.c_str(), nullptr), x) << s;
  }
  EXPECT_EQ(cli::format_double(0.5), "0.5");
}

TEST(Threads, EnvironmentOverride) {
  ::setenv("QSD_NUM_THREADS", "3", 1);
  EXPECT_EQ(cli::threads_from_env(), 3);
  ::setenv("QSD_NUM_THREADS", "x", 1);
  EXPECT_EQ(cli::threads_from_env(), 0);
  ::unsetenv("QSD_NUM_THREADS");
  EXPECT_EQ(cli::threads_from_env(), 0);
}

TEST(ExitCodes, MissingFileIsValidation) {
  const auto r = run({"solve", "/nonexistent/model.json"});
  EXPECT_EQ(r.code, cli::kExitValidation);
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
  EXPECT_NE(r.err.find("cannot open model file"), std::string::npos);
}

TEST(ExitCodes, UsageAndValidation) {
  EXPECT_EQ(run({}).code, cli::kExitValidation);
  EXPECT_EQ(run({"solve"}).code, cli::kExitValidation);
  EXPECT_EQ(run({"solve", model("example1_linfrac"), "--method", "magic"}).code, cli::kExitValidation);
  EXPECT_EQ(run({"solve", model("example1_linfrac"), "--n", "100"}).code, cli::kExitValidation);
  EXPECT_EQ(run({"solve", model("example1_linfrac"), "--r", "3.0"}).code, cli::kExitValidation);
  EXPECT_EQ(run({"bounds", model("example1_linfrac"), "--n", "2001"}).code, cli::kExitValidation);
  EXPECT_EQ(run({"simulate", model("example5_linfrac2d")}).code, cli::kExitValidation);
  EXPECT_EQ(run({"solve", model("example6_poly2d"), "--n", "256", "--method", "dense"}).code, cli::kExitValidation);
  EXPECT_EQ(run({"solve", model("example1_linfrac"), "--r1", "1.5", "--r2", "1.5"}).code, cli::kExitValidation);
  EXPECT_EQ(run({"solve", model("example5_linfrac2d"), "--n", "16", "--r1", "1.5"}).code, cli::kExitValidation);
  EXPECT_EQ(run({"solve", model("example5_linfrac2d"), "--n", "16", "--r", "1.5"}).code, cli::kExitValidation);
}

TEST(ExitCodes, NumericalFailure) {
  // Rank-1 ACA leaves a reduced eigenvalue the null space would beat.
  const auto r = run({"solve", model("example3_poly"), "--n", "1024", "--method", "lowrank", "--max-rank", "1"});
  EXPECT_EQ(r.code, cli::kExitNumerical) << r.err;
  EXPECT_EQ(r.err.rfind("error: numerical: ", 0), 0u);
}

TEST(ExitCodes, Help) {
  const auto r = run({"solve", "--help"});
  EXPECT_EQ(r.code, cli::kExitOk);
  EXPECT_NE(r.out.find("--method"), std::string::npos);
}

TEST(Solve, ExampleOneDense) {
  const auto csv = scratch() / "solve1.csv";
  const auto r = run({"solve", model("example1_linfrac"), "--n", "512", "--method", "dense", "--out", csv.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto meta = sidecar(csv);
  EXPECT_LE(meta["residual"].get<double>(), 1e-12);
  EXPECT_NEAR(meta["sum"].get<double>(), 1.0, 1e-12);
  for (const char* key : {"n", "r", "residual", "sum", "imag_leak", "rank", "wall_time_ms"})
    EXPECT_TRUE(meta.contains(key)) << key;
  const auto body = slurp(csv);
  EXPECT_EQ(header(body), "j,g_j");
  const auto rs = rows(body);
  ASSERT_EQ(rs.size(), 511u);
  EXPECT_NEAR(std::stod(rs[0][1]), 0.5, 1e-14);
}

TEST(Solve, OutputIsByteStable) {
  const auto dir = scratch();
  for (const char* method : {"dense", "lowrank"}) {
    const auto a = dir / (std::string("stable_a_") + method + ".csv");
    const auto b = dir / (std::string("stable_b_") + method + ".csv");
    ASSERT_EQ(run({"solve", model("example2_poly"), "--n", "256", "--method", method, "--out", a.string()}).code, 0);
    ASSERT_EQ(run({"solve", model("example2_poly"), "--n", "256", "--method", method, "--out", b.string()}).code, 0);
    EXPECT_EQ(slurp(a), slurp(b));
  }
}

TEST(Solve, StdoutWithMetaPath) {
  const auto meta = scratch() / "stdout_meta.json";
  const auto r = run({"solve", model("example1_linfrac"), "--n", "64", "--meta", meta.string()});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(header(r.out), "j,g_j");
  EXPECT_EQ(nlohmann::json::parse(slurp(meta))["n"], 64);
}

TEST(Solve, TwoTypeGrid) {
  const auto csv = scratch() / "solve2d.csv";
  const auto r = run({"solve", model("example5_linfrac2d"), "--n", "32", "--method", "dense", "--out", csv.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto meta = sidecar(csv);
  EXPECT_TRUE(meta.contains("r1"));
  EXPECT_TRUE(meta.contains("r2"));
  const auto body = slurp(csv);
  EXPECT_EQ(header(body), "h,k,g_hk");
  for (const auto& row : rows(body)) {
    ASSERT_EQ(row.size(), 3u);
    EXPECT_GT(std::abs(std::stod(row[2])), 1e-300);
    if (row[0] == "1" && row[1] == "0") EXPECT_NEAR(std::stod(row[2]), 0.375, 1e-4);
  }
}

TEST(Compare, DenseOnlyIsSingleColumn) {
  const auto r = run({"compare", model("example2_poly"), "--n", "64", "--methods", "dense"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(header(r.out), "j,dense");
  EXPECT_EQ(rows(r.out).size(), 63u);
}

TEST(Compare, LowRankMatchesDense) {
  const auto r = run({"compare", model("example1_linfrac"), "--n", "512", "--methods", "dense,lowrank"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(header(r.out), "j,dense,lowrank,oracle,rel_err_dense,rel_err_lowrank");
  for (const auto& row : rows(r.out)) EXPECT_LE(std::abs(std::stod(row[1]) - std::stod(row[2])), 1e-10);
}

TEST(Compare, FullTableOnExampleOne) {
  const auto r = run({"compare", model("example1_linfrac"), "--n", "512", "--jmax", "40", "--generations", "100000"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(header(r.out),
            "j,dense,lowrank,returnmap,interp,oracle,rel_err_dense,rel_err_lowrank,rel_err_returnmap,rel_err_interp");
  const auto rs = rows(r.out);
  ASSERT_EQ(rs.size(), 40u);
  EXPECT_LE(std::stod(rs[9][6]), 1e-10);
  EXPECT_EQ(rs[20][4], "");  // interp only has degree-12 coefficients
}

TEST(Compare, NoOracleAndTwoType) {
  EXPECT_EQ(header(run({"compare", model("example1_linfrac"), "--n", "32", "--methods", "dense", "--oracle", "none"}).out),
            "j,dense");
  const auto r = run({"compare", model("example5_linfrac2d"), "--n", "32", "--methods", "dense,lowrank", "--jmax", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(header(r.out), "h,k,dense,lowrank,oracle,rel_err_dense,rel_err_lowrank");
  EXPECT_EQ(rows(r.out).size(), 15u);
  EXPECT_EQ(run({"compare", model("example5_linfrac2d"), "--n", "32", "--methods", "interp"}).code,
            cli::kExitValidation);
  EXPECT_EQ(run({"compare", model("example1_linfrac"), "--methods", "magic"}).code, cli::kExitValidation);
}

TEST(Bounds, FirstRowClosedFormsAndDominance) {
  const auto csv = scratch() / "bounds.csv";
  const auto r = run({"bounds", model("example4_linfrac_p095"), "--n", "1000", "--out", csv.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto body = slurp(csv);
  EXPECT_EQ(header(body), "k,sigma_k,sigma_k_rel,bound_taylor,bound_zolotarev");
  const auto rs = rows(body);
  ASSERT_EQ(rs.size(), 1000u);
  const auto gf = OffspringGF::linear_fractional(0.95, 0.5);
  const double rr = sidecar(csv)["r"].get<double>();
  const double theta = (gf.evaluate(rr) - 0.95) / (rr - 0.95);
  EXPECT_NEAR(std::stod(rs[0][3]), 1000.0 / ((1 - theta) * (rr - 0.95)), 1e-9);
  EXPECT_EQ(std::stod(rs[0][4]), 1.0);
  EXPECT_EQ(std::stod(rs[0][2]), 1.0);
  for (const auto& row : rs) {
    if (std::stod(row[2]) < 1e-14) break;
    EXPECT_LE(std::stod(row[1]), std::stod(row[3]) * (1 + 1e-12));
    EXPECT_LE(std::stod(row[2]), std::stod(row[4]) * (1 + 1e-12));
  }
}

TEST(Bounds, Kmax) {
  const auto r = run({"bounds", model("example1_linfrac"), "--n", "64", "--kmax", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(rows(r.out).size(), 6u);
}

TEST(Simulate, SeedDeterminismAndTv) {
  const auto dir = scratch();
  const auto a = dir / "sim_a.csv", b = dir / "sim_b.csv", c = dir / "sim_c.csv";
  for (const auto& [path, seed] : {std::pair{a, "5"}, std::pair{b, "5"}, std::pair{c, "6"}})
    ASSERT_EQ(run({"simulate", model("example1_linfrac"), "--generations", "200000", "--seed", seed, "--out",
                   path.string()})
                  .code,
              0);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_NE(slurp(a), slurp(c));
  EXPECT_EQ(header(slurp(a)), "j,count,probability,oracle");
  EXPECT_LE(sidecar(a)["tv"].get<double>(), 0.02);
  EXPECT_EQ(sidecar(a)["total"].get<std::int64_t>(), 200001);
}

TEST(Simulate, PolynomialHasNoOracle) {
  const auto csv = scratch() / "sim_poly.csv";
  ASSERT_EQ(run({"simulate", model("example2_poly"), "--generations", "1000", "--out", csv.string()}).code, 0);
  EXPECT_EQ(header(slurp(csv)), "j,count,probability");
  EXPECT_FALSE(sidecar(csv).contains("tv"));
}

TEST(Moments, LinearFractionalAgreement) {
  const auto r = run({"moments", model("example1_linfrac"), "--n", "512", "--H", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(header(r.out), "h,from_coefficients,from_recurrence,rel_diff");
  const auto rs = rows(r.out);
  ASSERT_EQ(rs.size(), 5u);
  for (const auto& row : rs) EXPECT_LE(std::stod(row[3]), 1e-10) << row[0];
}

TEST(Moments, SingleRow) {
  const auto r = run({"moments", model("example1_linfrac"), "--n", "64", "--H", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  ASSERT_EQ(rows(r.out).size(), 1u);
  EXPECT_EQ(std::stod(rows(r.out)[0][3]), 0.0);
  EXPECT_EQ(run({"moments", model("example1_linfrac"), "--H", "0"}).code, cli::kExitValidation);
}

TEST(Moments, ExampleTwoAgreement) {
  const auto r = run({"moments", model("example2_poly"), "--n", "4096", "--H", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const auto& row : rows(r.out)) EXPECT_LE(std::stod(row[3]), 1e-8) << row[0];
}
