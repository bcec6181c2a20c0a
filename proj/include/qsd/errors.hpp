#pragma once

#include <stdexcept>
#include <string>

namespace qsd {

/// Broad classification used by the CLI to pick an exit code.
enum class ErrorCategory {
  Validation,  // bad input, unsupported regime, model violations
  Numerical,   // singular matrices, non-convergence, degenerate normalization
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

#define QSD_DEFINE_ERROR(Name, Category)                                   \
  class Name : public Error {                                              \
   public:                                                                 \
    explicit Name(const std::string& what) : Error(Category, what) {}      \
  };

QSD_DEFINE_ERROR(ConfigurationError, ErrorCategory::Validation)
QSD_DEFINE_ERROR(ValidationError, ErrorCategory::Validation)
QSD_DEFINE_ERROR(DomainError, ErrorCategory::Validation)
QSD_DEFINE_ERROR(UnsupportedRegimeError, ErrorCategory::Validation)
QSD_DEFINE_ERROR(ModelError, ErrorCategory::Validation)
QSD_DEFINE_ERROR(SingularMatrixError, ErrorCategory::Numerical)
QSD_DEFINE_ERROR(AnalysisError, ErrorCategory::Numerical)
QSD_DEFINE_ERROR(DegenerateContourError, ErrorCategory::Numerical)
QSD_DEFINE_ERROR(NormalizationError, ErrorCategory::Numerical)
QSD_DEFINE_ERROR(EigenAmbiguityError, ErrorCategory::Numerical)

#undef QSD_DEFINE_ERROR

/// Inverse iteration ran out of iterations; carries the last residual.
class IterationFailure : public Error {
 public:
  IterationFailure(const std::string& what, double last_residual)
      : Error(ErrorCategory::Numerical, what), last_residual_(last_residual) {}

  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

}  // namespace qsd
