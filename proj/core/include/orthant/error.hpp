#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace orthant {

/// Error classes; the CLI maps each one to a distinct exit code.
enum class ErrorKind {
  InvalidModel,      // malformed config, dimension mismatch, Sigma not SPD, ...
  DegenerateProblem, // QP with b <= 0, nonpositive case-(ii) sum, ...
  Unsupported,       // H = 1/2 on an asymptotic path, d above the enumeration cap
  NumericalFailure,  // no certified subset, bracket exhausted, quadrature stalled
  BudgetExceeded,    // Monte Carlo work cap hit
  Usage,             // bad CLI arguments
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace orthant
