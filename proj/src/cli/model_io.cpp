#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"

#include "qsd/cli.hpp"
#include "qsd/errors.hpp"

namespace qsd::cli {

namespace {

using nlohmann::json;

const json& field(const json& doc, const char* name) {
  if (!doc.contains(name)) throw ValidationError(std::string("model file is missing field \"") + name + "\"");
  return doc.at(name);
}

double number(const json& doc, const char* name) {
  const json& v = field(doc, name);
  if (!v.is_number()) throw ValidationError(std::string("model field \"") + name + "\" must be a number");
  return v.get<double>();
}

std::vector<double> numbers(const json& doc, const char* name) {
  const json& v = field(doc, name);
  if (!v.is_array()) throw ValidationError(std::string("model field \"") + name + "\" must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw ValidationError(std::string("model field \"") + name + "\" must be an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

void normalize(std::vector<double>& p) {
  const double s = std::accumulate(p.begin(), p.end(), 0.0);
  if (s > 0.0)
    for (double& x : p) x /= s;
}

RealMatrix grid(const json& doc, const char* name, int d1, int d2, bool renormalize) {
  auto values = numbers(doc, name);
  const auto expected = static_cast<std::size_t>(d1 + 1) * static_cast<std::size_t>(d2 + 1);
  if (values.size() != expected)
    throw ValidationError(std::string("model field \"") + name + "\" has " + std::to_string(values.size()) +
                          " entries, degrees need " + std::to_string(expected));
  if (renormalize) normalize(values);
  RealMatrix p(d1 + 1, d2 + 1);
  for (int h = 0; h <= d1; ++h)
    for (int k = 0; k <= d2; ++k) p(h, k) = values[static_cast<std::size_t>(h * (d2 + 1) + k)];
  return p;
}

Eigen::Vector2d vec2(const json& doc, const char* name) {
  const auto v = numbers(doc, name);
  if (v.size() != 2) throw ValidationError(std::string("model field \"") + name + "\" must have 2 entries");
  return {v[0], v[1]};
}

Eigen::Matrix2d mat2(const json& doc, const char* name) {
  const json& v = field(doc, name);
  const char* msg = "must be a 2x2 array of numbers";
  if (!v.is_array() || v.size() != 2) throw ValidationError(std::string("model field \"") + name + "\" " + msg);
  Eigen::Matrix2d m;
  for (int i = 0; i < 2; ++i) {
    if (!v[i].is_array() || v[i].size() != 2) throw ValidationError(std::string("model field \"") + name + "\" " + msg);
    for (int j = 0; j < 2; ++j) {
      if (!v[i][j].is_number()) throw ValidationError(std::string("model field \"") + name + "\" " + msg);
      m(i, j) = v[i][j].get<double>();
    }
  }
  return m;
}

}  // namespace

Model parse_model(std::string_view json_text, bool renormalize) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("model file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ValidationError("model file must hold a JSON object");
  const json& type = field(doc, "type");
  if (!type.is_string()) throw ValidationError("model field \"type\" must be a string");
  const auto t = type.get<std::string>();

  if (t == "polynomial") {
    auto p = numbers(doc, "coeffs");
    if (renormalize) normalize(p);
    if (p.size() == 2 && doc.value("affine", false)) return OffspringGF::affine(p[1]);
    return OffspringGF::polynomial(std::move(p));
  }
  if (t == "linfrac") return OffspringGF::linear_fractional(number(doc, "p0"), number(doc, "p"));
  if (t == "polynomial2d") {
    const auto deg = numbers(doc, "degrees");
    if (deg.size() != 2 || deg[0] < 0 || deg[1] < 0 || deg[0] != static_cast<int>(deg[0]) ||
        deg[1] != static_cast<int>(deg[1]))
      throw ValidationError("model field \"degrees\" must be two nonnegative integers");
    const int d1 = static_cast<int>(deg[0]), d2 = static_cast<int>(deg[1]);
    return BivariateOffspring::polynomial(grid(doc, "coeffs1", d1, d2, renormalize),
                                          grid(doc, "coeffs2", d1, d2, renormalize));
  }
  if (t == "linfrac2d")
    return BivariateOffspring::linear_fractional(mat2(doc, "S"), vec2(doc, "c"), vec2(doc, "b"), number(doc, "d"));
  throw ValidationError("unknown model type \"" + t + "\" (expected polynomial, linfrac, polynomial2d or linfrac2d)");
}

Model load_model(const std::string& path, bool renormalize) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open model file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_model(buffer.str(), renormalize);
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

int threads_from_env() {
  const char* v = std::getenv("QSD_NUM_THREADS");
  if (!v || !*v) return 0;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  return (*end == '\0' && n > 0 && n < 1 << 16) ? static_cast<int>(n) : 0;
}

}  // namespace qsd::cli
