#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace prime {

enum class ErrorCode {
  MalformedCsv,
  MissingResponse,
  StructureMismatch,
  DegenerateColumn,
  InvalidDegree,
  InsufficientData,
  OutOfDomain,
  LengthMismatch,
  InvalidConfig,
  Underdetermined,
  InsufficientCompleteCases,
  IncompleteRow,
  UnknownColumn,
  SingularGram,
  LeverageOne,
  MissingBaseline,
  DegenerateMu,
  MalformedFitFile,
};

/// Broad failure category, used by the CLI to pick an exit code.
enum class ErrorKind { Usage, Data, Numerical };

std::string_view to_string(ErrorCode code);
ErrorKind kind_of(ErrorCode code);

/// Every library failure is reported through this exception type; `code()`
/// identifies the condition and `what()` names the offending unit/column.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  ErrorKind kind() const noexcept { return kind_of(code_); }

 private:
  ErrorCode code_;
};

}  // namespace prime
