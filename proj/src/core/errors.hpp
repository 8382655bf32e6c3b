#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace obslab {

/// Coarse failure class, used to pick exit codes / C API status values.
enum class ErrorKind {
  Validation,  // bad inputs: schema, alignment, precondition violations
  Numeric,     // solver failures: ConvergenceFailure, EnergyNotPD
};

/// Carries a stable error name (e.g. "NonPositiveCoefficient") next to the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string name, const std::string& what)
      : std::runtime_error(name + ": " + what), kind_(kind), name_(std::move(name)) {}

  ErrorKind kind() const { return kind_; }
  const std::string& name() const { return name_; }

 private:
  ErrorKind kind_;
  std::string name_;
};

[[noreturn]] inline void throw_validation(const std::string& name, const std::string& what) {
  throw Error(ErrorKind::Validation, name, what);
}

[[noreturn]] inline void throw_numeric(const std::string& name, const std::string& what) {
  throw Error(ErrorKind::Numeric, name, what);
}

}  // namespace obslab
