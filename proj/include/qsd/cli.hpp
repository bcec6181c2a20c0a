#pragma once

// Command-line front end: model files, subcommands and output formatting.

#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>

#include "qsd/genfun.hpp"
#include "qsd/multitype.hpp"

namespace qsd::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;  // unexpected internal failure
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;

using Model = std::variant<OffspringGF, BivariateOffspring>;

/// Parses a model document. With renormalize, probability vectors and grids
/// are divided by their sums before validation instead of being rejected.
Model parse_model(std::string_view json_text, bool renormalize = false);

/// Reads and parses a model file. A missing file is a ConfigurationError.
Model load_model(const std::string& path, bool renormalize = false);

/// 17 significant digits, enough to round-trip any double.
std::string format_double(double x);

/// Thread count from QSD_NUM_THREADS; 0 when unset or not a positive integer.
int threads_from_env();

/// Runs one command line. Tables go to `out`; a single-line reason goes to
/// `err` on failure. Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qsd::cli
