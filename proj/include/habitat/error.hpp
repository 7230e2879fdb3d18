#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace habitat {

enum class ErrorCode {
  kInvalidArgument = 1,
  kOutOfBracket,
  kBracketingFailed,
  kMeshFailure,
  kConvergenceFailure,
  kNegativeAverageViolated,
  kInadmissibleMeasure,
  kNotApplicable,
  kMonotonicityViolation,
  kNonPrincipalBranch,
  kNotStarShaped,
  kInsufficientSamples,
  kInsufficientData,
  kInvalidConfig,
  kOutputExists,
  kIoError,
};

std::string_view error_code_name(ErrorCode code);

/// Process exit status used by the CLI for a given error code.
int exit_status(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Eigen-iteration stagnation; carries the last observed residual.
class ConvergenceFailure : public Error {
 public:
  ConvergenceFailure(const std::string& what, double last_residual)
      : Error(ErrorCode::kConvergenceFailure, what),
        last_residual_(last_residual) {}

  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

}  // namespace habitat
