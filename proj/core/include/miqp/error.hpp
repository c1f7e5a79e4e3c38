#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace miqp {

enum class ErrorCode {
  NotPsd,
  NotSymmetric,
  NotPd,
  InfeasibleDelta,
  SingularSystem,
  MaxIterations,
  NumericalFailure,
  EmptySupport,
  Infeasible,
  FractionalInput,
  NonUniformDelta,
  BadSpec,
  ParseError,
  DimensionMismatch,
  TooLarge,
  NonSmoothPoint,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so that
/// callers (and the CLI exit-code mapping) can branch without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }
  /// Message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace miqp
