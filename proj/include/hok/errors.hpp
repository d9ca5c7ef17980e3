#pragma once

#include <stdexcept>
#include <string>

namespace hok {

enum class ErrorCode {
  invalid_input,
  invalid_parameter,
  dimension_mismatch,
  invariant_violation,
  numeric_failure,
  degenerate_fit,
  undefined_metric,
  stratification,
  io_failure,
  validation,
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_input: return "invalid_input";
    case ErrorCode::invalid_parameter: return "invalid_parameter";
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::invariant_violation: return "invariant_violation";
    case ErrorCode::numeric_failure: return "numeric_failure";
    case ErrorCode::degenerate_fit: return "degenerate_fit";
    case ErrorCode::undefined_metric: return "undefined_metric";
    case ErrorCode::stratification: return "stratification";
    case ErrorCode::io_failure: return "io_failure";
    case ErrorCode::validation: return "validation";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

struct InvalidInputError : Error {
  explicit InvalidInputError(const std::string& w) : Error(ErrorCode::invalid_input, w) {}
};
struct InvalidParameterError : Error {
  explicit InvalidParameterError(const std::string& w) : Error(ErrorCode::invalid_parameter, w) {}
};
struct DimensionError : Error {
  explicit DimensionError(const std::string& w) : Error(ErrorCode::dimension_mismatch, w) {}
};
struct InvariantError : Error {
  explicit InvariantError(const std::string& w) : Error(ErrorCode::invariant_violation, w) {}
};
struct NumericError : Error {
  explicit NumericError(const std::string& w) : Error(ErrorCode::numeric_failure, w) {}
};
struct DegenerateFitError : Error {
  explicit DegenerateFitError(const std::string& w) : Error(ErrorCode::degenerate_fit, w) {}
};
struct UndefinedMetricError : Error {
  explicit UndefinedMetricError(const std::string& w) : Error(ErrorCode::undefined_metric, w) {}
};
struct StratificationError : Error {
  explicit StratificationError(const std::string& w) : Error(ErrorCode::stratification, w) {}
};
struct IoError : Error {
  explicit IoError(const std::string& w) : Error(ErrorCode::io_failure, w) {}
};
struct ValidationError : Error {
  explicit ValidationError(const std::string& w) : Error(ErrorCode::validation, w) {}
};

}  // namespace hok
