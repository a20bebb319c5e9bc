#pragma once

#include <stdexcept>
#include <string>

namespace sparsestage {

enum class ErrorCode {
  invalid_dimension,
  degenerate_column,
  invalid_sparsity,
  invalid_argument,
  invalid_weight,
  invalid_spectrum,
  domain_error,
  condition_violated,
  budget_exceeded,
  singular_system,
  numeric_failure,
  io_error,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_dimension: return "invalid-dimension";
    case ErrorCode::degenerate_column: return "degenerate-column";
    case ErrorCode::invalid_sparsity: return "invalid-sparsity";
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::invalid_weight: return "invalid-weight";
    case ErrorCode::invalid_spectrum: return "invalid-spectrum";
    case ErrorCode::domain_error: return "division-domain";
    case ErrorCode::condition_violated: return "condition-violated";
    case ErrorCode::budget_exceeded: return "budget-exceeded";
    case ErrorCode::singular_system: return "singular-system";
    case ErrorCode::numeric_failure: return "numeric-failure";
    case ErrorCode::io_error: return "io-error";
  }
  return "unknown";
}

/// Single exception type for the library; `code()` tells callers what went wrong.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  /// Numeric failures (NaN/Inf, singular systems) versus bad input.
  bool is_numeric() const noexcept {
    return code_ == ErrorCode::numeric_failure || code_ == ErrorCode::singular_system;
  }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace sparsestage
