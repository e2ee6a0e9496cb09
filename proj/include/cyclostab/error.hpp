#pragma once

#include <stdexcept>
#include <string>

namespace cyclostab {

enum class ErrorCode {
  kInvalidArgument,
  kPoleOnSpectrum,
  kNonConvergence,
  kPoleOnAxis,
  kZeroPolynomial,
  kNotStabilizable,
  kDelayUnsupported,
  kImproperSystem,
  kTransformPole,
  kUnboundable,
  kPointOnCurve,
  kStabilityCheckFailed,
  kNotHurwitz,
  kInfeasible,
  kMarginalCase,
  kParseError,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kPoleOnSpectrum: return "PoleOnSpectrum";
    case ErrorCode::kNonConvergence: return "NonConvergence";
    case ErrorCode::kPoleOnAxis: return "PoleOnAxis";
    case ErrorCode::kZeroPolynomial: return "ZeroPolynomial";
    case ErrorCode::kNotStabilizable: return "NotStabilizable";
    case ErrorCode::kDelayUnsupported: return "DelayUnsupported";
    case ErrorCode::kImproperSystem: return "ImproperSystem";
    case ErrorCode::kTransformPole: return "TransformPole";
    case ErrorCode::kUnboundable: return "Unboundable";
    case ErrorCode::kPointOnCurve: return "PointOnCurve";
    case ErrorCode::kStabilityCheckFailed: return "StabilityCheckFailed";
    case ErrorCode::kNotHurwitz: return "NotHurwitz";
    case ErrorCode::kInfeasible: return "Infeasible";
    case ErrorCode::kMarginalCase: return "MarginalCase";
    case ErrorCode::kParseError: return "ParseError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI exit-code mapping) can branch without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cyclostab
