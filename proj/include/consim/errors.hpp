#pragma once

#include <stdexcept>
#include <string>

namespace consim {

enum class ErrorKind {
  // graph construction / spectral
  DuplicateEdge,
  SelfLoop,
  NonPositiveWeight,
  IndexOutOfRange,
  NotStronglyConnected,
  SolverDidNotConverge,
  // nonlinearities
  EmptyList,
  QuadratureFailure,
  // inclusion / integration
  NotHomogeneous,
  NonFiniteState,
  // scenario front end
  ParseError,
  ValidationError,
  RequirementUnsatisfiable,
};

const char* to_string(ErrorKind kind);

/// Library-wide exception; tests and the CLI dispatch on kind().
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace consim
