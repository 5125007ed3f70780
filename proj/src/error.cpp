#include "agetrack/error.hpp"

namespace agetrack {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NoRoot: return "NoRoot";
    case ErrorCode::DegenerateShape: return "DegenerateShape";
    case ErrorCode::NonPositive: return "NonPositive";
    case ErrorCode::InvalidIC: return "InvalidIC";
    case ErrorCode::HistoryGap: return "HistoryGap";
    case ErrorCode::LogDomain: return "LogDomain";
    case ErrorCode::NonPositiveOutput: return "NonPositiveOutput";
    case ErrorCode::RootSearchExhausted: return "RootSearchExhausted";
    case ErrorCode::DependentBasis: return "DependentBasis";
    case ErrorCode::PositivityViolation: return "PositivityViolation";
    case ErrorCode::Instability: return "Instability";
    case ErrorCode::B3Fail: return "B3Fail";
    case ErrorCode::NoFeasiblePair: return "NoFeasiblePair";
    case ErrorCode::InvalidTrajectory: return "InvalidTrajectory";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace agetrack
