#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace footif {

enum class ErrorCode {
  InvalidArgument,
  InvalidGeometry,
  DegenerateGeometry,
  OutOfDomain,
  SingularDenominator,
  OutOfWorkspace,
  EmptySeries,
  EmptyTrack,
  AllStatic,
  TooShort,
  ConstantChannel,
  NonConvergence,
  DegenerateWhitening,
  DegenerateRange,
  NotDiagonal,
  ParseError,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library; `code()` tells callers which
/// contract was violated.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// True for the error codes produced by numerical failure rather than bad input.
bool is_numerical(ErrorCode code);

}  // namespace footif
