#include "sqe/error.hpp"

namespace sqe {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidShape: return "invalid_shape";
    case ErrorKind::kInvalidIndex: return "invalid_index";
    case ErrorKind::kInvalidArgument: return "invalid_argument";
    case ErrorKind::kLimit: return "limit";
    case ErrorKind::kNumericalInconsistency: return "numerical_inconsistency";
    case ErrorKind::kStructureNotApplicable: return "structure_not_applicable";
    case ErrorKind::kSolverFailure: return "solver_failure";
    case ErrorKind::kSoundness: return "soundness";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(message), kind_(kind) {}

SolverFailure::SolverFailure(const std::string& message, double best_g)
    : Error(ErrorKind::kSolverFailure, message), best_g_(best_g) {}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace sqe
