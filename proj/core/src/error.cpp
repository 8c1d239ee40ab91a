#include "stablefield/error.hpp"

namespace stablefield {

std::string_view error_class_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDomain: return "domain_error";
    case ErrorCode::kValidation: return "validation_error";
    case ErrorCode::kOverlap: return "overlap_error";
    case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
    case ErrorCode::kModelInvalid: return "model_invalid";
    case ErrorCode::kInapplicable: return "inapplicable";
    case ErrorCode::kSolver: return "solver_error";
    case ErrorCode::kDivergence: return "divergence_error";
    case ErrorCode::kNumeric: return "numeric_error";
    case ErrorCode::kConditionA: return "condition_a_violation";
    case ErrorCode::kGrowthGate: return "growth_gate";
    case ErrorCode::kConfig: return "config_error";
    case ErrorCode::kIo: return "io_error";
  }
  return "unknown_error";
}

void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace stablefield
