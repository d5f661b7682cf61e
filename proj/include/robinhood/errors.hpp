#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace robinhood {

enum class ErrorKind {
  ParseError,
  SpecInvalid,
  IndexBeyondHorizon,
  TermUndefined,
  RestrictionViolated,
  ValidityViolated,
  ScheduleExhausted,
  LimitExceeded,
  VerificationFailed,
};

std::string_view error_name(ErrorKind kind);

// Every failure raised by the library carries one of the named kinds above so
// that callers (and the CLI) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace robinhood
