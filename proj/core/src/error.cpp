#include "orthant/error.hpp"

namespace orthant {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidModel: return "invalid_model";
    case ErrorKind::DegenerateProblem: return "degenerate_problem";
    case ErrorKind::Unsupported: return "unsupported";
    case ErrorKind::NumericalFailure: return "numerical_failure";
    case ErrorKind::BudgetExceeded: return "budget_exceeded";
    case ErrorKind::Usage: return "usage";
  }
  return "unknown";
}

}  // namespace orthant
