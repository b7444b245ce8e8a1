#include "wkblab/error.hpp"

namespace wkb {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::Schema: return "SchemaError";
    case ErrorCode::Io: return "IoError";
    case ErrorCode::SlackViolation: return "SlackViolation";
    case ErrorCode::InitialMassViolation: return "InitialMassViolation";
    case ErrorCode::StepFailure: return "StepFailure";
    case ErrorCode::NewtonDivergence: return "NewtonDivergence";
    case ErrorCode::EnumerationCap: return "EnumerationCap";
    case ErrorCode::NonHyperbolic: return "NonHyperbolic";
    case ErrorCode::NoAdmissible: return "NoAdmissible";
    case ErrorCode::MultipleAdmissible: return "MultipleAdmissible";
    case ErrorCode::TimeoutNoConvergence: return "TimeoutNoConvergence";
    case ErrorCode::WrongFamily: return "WrongFamily";
    case ErrorCode::MaxNotZero: return "MaxNotZero";
    case ErrorCode::MaxDrift: return "MaxDrift";
    case ErrorCode::EventStall: return "EventStall";
    case ErrorCode::ScheduleGap: return "ScheduleGap";
    case ErrorCode::TooManyJumps: return "TooManyJumps";
    case ErrorCode::MassEscape: return "MassEscape";
  }
  return "Unknown";
}

}  // namespace wkb
