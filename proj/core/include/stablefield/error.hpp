#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stablefield {

enum class ErrorCode {
  kDomain,
  kValidation,
  kOverlap,
  kDimensionMismatch,
  kModelInvalid,
  kInapplicable,
  kSolver,
  kDivergence,
  kNumeric,
  kConditionA,
  kGrowthGate,
  kConfig,
  kIo,
};

/// Stable, machine-parsable name of an error class ("domain_error", ...).
std::string_view error_class_name(ErrorCode code);

/// Base exception for every library failure. The CLI prints
/// `error_class_name(code())` followed by `what()` on a single line.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace stablefield
