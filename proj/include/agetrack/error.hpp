#pragma once

#include <stdexcept>
#include <string>

namespace agetrack {

enum class ErrorCode {
  InvalidArgument,
  NoRoot,
  DegenerateShape,
  NonPositive,
  InvalidIC,
  HistoryGap,
  LogDomain,
  NonPositiveOutput,
  RootSearchExhausted,
  DependentBasis,
  PositivityViolation,
  Instability,
  B3Fail,
  NoFeasiblePair,
  InvalidTrajectory,
  GridMismatch,
  ParseError,
  ValidationError,
};

const char* to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (and tests) can dispatch on the kind rather than the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace agetrack
