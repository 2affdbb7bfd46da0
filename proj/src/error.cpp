#include "padiq/error.hpp"

namespace padiq {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::PrecisionExceeded: return "precision-exceeded";
    case ErrorKind::ContractViolation: return "contract-violation";
    case ErrorKind::NotConstantOnBall: return "not-constant-on-ball";
    case ErrorKind::DegenerateCell: return "degenerate-cell";
    case ErrorKind::InsufficientDepth: return "insufficient-depth";
    case ErrorKind::InvalidParametricMultiball: return "invalid-parametric-multiball";
    case ErrorKind::OutOfCell: return "out-of-cell";
    case ErrorKind::UnsupportedInput: return "unsupported-input";
    case ErrorKind::NonIntegrable: return "non-integrable";
    case ErrorKind::OutOfDomain: return "out-of-domain";
    case ErrorKind::NormalFormRequired: return "normal-form-required";
    case ErrorKind::InconsistentInput: return "inconsistent-input";
    case ErrorKind::InsufficientLevel: return "insufficient-level";
    case ErrorKind::BudgetExceeded: return "budget-exceeded";
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::SyntaxError: return "syntax-error";
    case ErrorKind::SemanticError: return "semantic-error";
  }
  return "unknown";
}

}  // namespace padiq
