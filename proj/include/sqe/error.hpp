#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sqe {

enum class ErrorKind {
  kInvalidShape,
  kInvalidIndex,
  kInvalidArgument,
  kLimit,
  kNumericalInconsistency,
  kStructureNotApplicable,
  kSolverFailure,
  kSoundness,
};

std::string_view to_string(ErrorKind kind);

/// Base exception for every failure raised by the library. The kind is
/// stable and is what the CLI serializes into its error JSON.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// No restart of the iterative solver converged. Carries the best value seen.
class SolverFailure : public Error {
 public:
  SolverFailure(const std::string& message, double best_g);

  double best_g() const noexcept { return best_g_; }

 private:
  double best_g_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) fail(kind, message);
}

}  // namespace sqe
