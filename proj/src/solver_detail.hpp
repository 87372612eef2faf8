#pragma once

// Party-ordered problem representation shared by the solver sources. Every
// problem is an operator on the tensor product of its party spaces; a
// partition of the original system maps onto it by grouping subsystems.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <optional>
#include <thread>
#include <vector>

#include "sqe/sqe_solver.hpp"

namespace sqe::detail {

using Spinor = std::vector<std::vector<Vector>>;  // [party][term]

struct Problem {
  Matrix op;
  std::vector<Index> dims;
  std::vector<std::vector<int>> local_dims;  // subsystem dims inside each party

  int parties() const { return static_cast<int>(dims.size()); }
  Index total() const { return op.rows(); }
};

struct Candidate {
  double g = 0.0;
  Spinor spinor;
  bool exact = false;
  SolveMethod method = SolveMethod::kAlternating;
  bool converged = true;
  int sweeps = 0;
  int restarts = 0;
  double max_decrease = 0.0;
  std::vector<double> history;
};

Problem make_problem(const HermitianOperator& op, const Partition& partition);
Problem sub_problem(Matrix op, const Problem& parent, const std::vector<int>& kept_parties);

Vector assemble(const Spinor& spinor, const std::vector<Index>& dims);
/// Linear map a^(q) -> phi with all other parties held fixed.
Matrix linear_map(const Spinor& spinor, const std::vector<Index>& dims, int party);
ResidualReport residual(const Problem& problem, const Spinor& spinor, double g);
Spinor zero_spinor(const std::vector<Index>& dims, int r);

/// Moves `party` to the front; the result is (d_party x rest) row-major.
Matrix party_front_matrix(const Vector& v, const std::vector<Index>& dims, int party);
/// Applies a local matrix to one party of a party-ordered vector.
Vector apply_local(const Vector& v, const std::vector<Index>& dims, int party, const Matrix& m);
/// <u|_party v, a vector on the remaining parties.
Vector contract_party(const Vector& v, const std::vector<Index>& dims, int party, const Vector& u);

Candidate alternating_core(const Problem& problem, int r, std::uint64_t seed,
                           const SolverOptions& options);
/// Best converged run over seeded restarts. Throws SolverFailure when none converged.
Candidate multistart_core(const Problem& problem, int r, const SolverOptions& options);
std::optional<Candidate> closed_form_core(const Problem& problem, int r,
                                          const SolverOptions& options);
/// Closed forms first; falls back to the heuristic when no exact value exists.
Candidate solve_core(const Problem& problem, int r, const SolverOptions& options);

std::optional<Vector> rank_one_vector(const Matrix& op);
double upper_bound_rank_one(const Vector& psi, const std::vector<Index>& dims, int r);

std::uint64_t splitmix64(std::uint64_t x);

SQESolution to_solution(const Problem& problem, const Partition& partition, int r, Candidate c);

template <typename Fn>
void parallel_for(int count, unsigned threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max(count, 1)));
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) fn(i);
    });
  }
}

}  // namespace sqe::detail
