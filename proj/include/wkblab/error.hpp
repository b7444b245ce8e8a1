#pragma once

#include <stdexcept>
#include <string>

namespace wkb {

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  Schema,
  Io,
  SlackViolation,
  InitialMassViolation,
  StepFailure,
  NewtonDivergence,
  EnumerationCap,
  NonHyperbolic,
  NoAdmissible,
  MultipleAdmissible,
  TimeoutNoConvergence,
  WrongFamily,
  MaxNotZero,
  MaxDrift,
  EventStall,
  ScheduleGap,
  TooManyJumps,
  MassEscape,
};

const char* to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries one of the codes above so the
// C layer can map it onto a status without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace wkb
