#include "miqp/error.hpp"

namespace miqp {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotPsd: return "NotPsd";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NotPd: return "NotPd";
    case ErrorCode::InfeasibleDelta: return "InfeasibleDelta";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::MaxIterations: return "MaxIterations";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::EmptySupport: return "EmptySupport";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::FractionalInput: return "FractionalInput";
    case ErrorCode::NonUniformDelta: return "NonUniformDelta";
    case ErrorCode::BadSpec: return "BadSpec";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::NonSmoothPoint: return "NonSmoothPoint";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

}  // namespace miqp
