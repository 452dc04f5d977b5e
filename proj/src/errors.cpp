#include "prime/errors.hpp"

namespace prime {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedCsv: return "MalformedCsv";
    case ErrorCode::MissingResponse: return "MissingResponse";
    case ErrorCode::StructureMismatch: return "StructureMismatch";
    case ErrorCode::DegenerateColumn: return "DegenerateColumn";
    case ErrorCode::InvalidDegree: return "InvalidDegree";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::Underdetermined: return "Underdetermined";
    case ErrorCode::InsufficientCompleteCases: return "InsufficientCompleteCases";
    case ErrorCode::IncompleteRow: return "IncompleteRow";
    case ErrorCode::UnknownColumn: return "UnknownColumn";
    case ErrorCode::SingularGram: return "SingularGram";
    case ErrorCode::LeverageOne: return "LeverageOne";
    case ErrorCode::MissingBaseline: return "MissingBaseline";
    case ErrorCode::DegenerateMu: return "DegenerateMu";
    case ErrorCode::MalformedFitFile: return "MalformedFitFile";
  }
  return "Unknown";
}

ErrorKind kind_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidConfig:
      return ErrorKind::Usage;
    case ErrorCode::Underdetermined:
    case ErrorCode::InsufficientCompleteCases:
    case ErrorCode::SingularGram:
    case ErrorCode::LeverageOne:
    case ErrorCode::DegenerateMu:
      return ErrorKind::Numerical;
    default:
      return ErrorKind::Data;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace prime
