#include "habitat/error.hpp"

namespace habitat {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kOutOfBracket: return "OutOfBracket";
    case ErrorCode::kBracketingFailed: return "BracketingFailed";
    case ErrorCode::kMeshFailure: return "MeshFailure";
    case ErrorCode::kConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::kNegativeAverageViolated: return "NegativeAverageViolated";
    case ErrorCode::kInadmissibleMeasure: return "InadmissibleMeasure";
    case ErrorCode::kNotApplicable: return "NotApplicable";
    case ErrorCode::kMonotonicityViolation: return "MonotonicityViolation";
    case ErrorCode::kNonPrincipalBranch: return "NonPrincipalBranch";
    case ErrorCode::kNotStarShaped: return "NotStarShaped";
    case ErrorCode::kInsufficientSamples: return "InsufficientSamples";
    case ErrorCode::kInsufficientData: return "InsufficientData";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kOutputExists: return "OutputExists";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

int exit_status(ErrorCode code) { return 10 + static_cast<int>(code); }

}  // namespace habitat
