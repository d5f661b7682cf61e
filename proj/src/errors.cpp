#include "robinhood/errors.hpp"

namespace robinhood {

std::string_view error_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::SpecInvalid: return "SpecInvalid";
    case ErrorKind::IndexBeyondHorizon: return "IndexBeyondHorizon";
    case ErrorKind::TermUndefined: return "TermUndefined";
    case ErrorKind::RestrictionViolated: return "RestrictionViolated";
    case ErrorKind::ValidityViolated: return "ValidityViolated";
    case ErrorKind::ScheduleExhausted: return "ScheduleExhausted";
    case ErrorKind::LimitExceeded: return "LimitExceeded";
    case ErrorKind::VerificationFailed: return "VerificationFailed";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(error_name(kind)) + ": " + message), kind_(kind) {}

}  // namespace robinhood
