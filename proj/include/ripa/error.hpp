#pragma once

#include <stdexcept>
#include <string>

namespace ripa {

enum class ErrorKind {
  DimensionMismatch,
  NonPositiveIndex,
  SingularSystem,
  NoClosedForm,
  NotMonotone,
  SetValued,
  InvalidArgument,
  StepUnderflow,
};

const char* to_string(ErrorKind kind);

/// Every failure raised by the library carries a kind so that front ends can
/// map it to an exit status without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Adaptive integration could not make progress. `last_good_t` is the last
/// time at which an accepted state exists.
class IntegrationError : public Error {
 public:
  IntegrationError(double last_good_t, const std::string& what)
      : Error(ErrorKind::StepUnderflow, what), last_good_t_(last_good_t) {}

  double last_good_t() const noexcept { return last_good_t_; }

 private:
  double last_good_t_;
};

}  // namespace ripa
