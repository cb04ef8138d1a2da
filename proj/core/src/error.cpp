#include "footif/error.hpp"

namespace footif {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidGeometry: return "InvalidGeometry";
    case ErrorCode::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::SingularDenominator: return "SingularDenominator";
    case ErrorCode::OutOfWorkspace: return "OutOfWorkspace";
    case ErrorCode::EmptySeries: return "EmptySeries";
    case ErrorCode::EmptyTrack: return "EmptyTrack";
    case ErrorCode::AllStatic: return "AllStatic";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::ConstantChannel: return "ConstantChannel";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::DegenerateWhitening: return "DegenerateWhitening";
    case ErrorCode::DegenerateRange: return "DegenerateRange";
    case ErrorCode::NotDiagonal: return "NotDiagonal";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

bool is_numerical(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateGeometry:
    case ErrorCode::OutOfDomain:
    case ErrorCode::SingularDenominator:
    case ErrorCode::NonConvergence:
    case ErrorCode::DegenerateWhitening:
    case ErrorCode::DegenerateRange:
    case ErrorCode::ConstantChannel:
      return true;
    default:
      return false;
  }
}

}  // namespace footif
