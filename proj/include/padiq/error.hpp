#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace padiq {

enum class ErrorKind {
  PrecisionExceeded,
  ContractViolation,
  NotConstantOnBall,
  DegenerateCell,
  InsufficientDepth,
  InvalidParametricMultiball,
  OutOfCell,
  UnsupportedInput,
  NonIntegrable,
  OutOfDomain,
  NormalFormRequired,
  InconsistentInput,
  InsufficientLevel,
  BudgetExceeded,
  InvalidInput,
  SyntaxError,
  SemanticError,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) fail(kind, message);
}

}  // namespace padiq
