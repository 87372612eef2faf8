#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "sqe/partitions.hpp"
#include "sqe/tensor.hpp"

namespace sqe {

/// r product terms over the parties of a partition:
///   |phi> = sum_i |a_i^(1), ..., a_i^(n)>.
/// party_vectors[q][i] is |a_i^(q)>, living on the block space of party q.
struct SpinorDecomposition {
  Partition partition;
  int rank = 0;
  std::vector<std::vector<Vector>> party_vectors;

  /// The assembled vector with subsystems grouped party by party.
  Vector assemble_party_order() const;
  /// The assembled vector in the original subsystem ordering of `shape`.
  PureState assemble(const SystemShape& shape) const;
};

/// Partial contractions of L and of the identity with every party except one.
/// Both are stored as (r*d_q) x (r*d_q) matrices of r x r blocks; block (i,j)
/// is <a_i^(bar q)| A |a_j^(bar q)>.
struct GramOperators {
  int party = 0;
  int rank = 0;
  Index party_dim = 0;
  Matrix l_bar;
  Matrix i_bar;
};

enum class SolveMethod { kClosedFormOpb, kPartiallySeparable, kAlternating };

std::string_view to_string(SolveMethod method);
SolveMethod solve_method_from_string(std::string_view name);

struct SQESolution {
  double g = 0.0;
  SpinorDecomposition spinor;
  double residual_norm = 0.0;
  double residual_orthogonality = 0.0;
  bool converged = false;
  int restarts_used = 0;
  int sweeps = 0;
  SolveMethod method = SolveMethod::kAlternating;
  /// g after every single-party update (only when requested).
  std::vector<double> history;
  /// Largest drop of g between consecutive party updates (0 when monotone).
  double max_decrease = 0.0;
};

struct SolverOptions {
  int max_iter = 500;
  double tol = 1e-10;
  double orthogonality_tol = 1e-8;
  int restarts = 32;
  std::uint64_t seed = 20140101;
  bool record_history = false;
  bool use_closed_forms = true;
  bool use_heuristic = true;
  /// Worker threads for restarts; 0 picks the hardware concurrency.
  unsigned threads = 0;
};

struct ResidualReport {
  double residual_norm = 0.0;
  double orthogonality_violation = 0.0;
};

/// Outcome of g_r_max: the best value found and how much it can be trusted.
/// `exact` is set only when a closed form produced the value and (for
/// rank-one operators) it meets the bipartite-coarsening upper bound.
/// Heuristic values are lower bounds on g_r.
struct GrResult {
  double g = 0.0;
  bool exact = false;
  SolveMethod method = SolveMethod::kAlternating;
  SQESolution solution;
  std::optional<double> closed_form_g;
  bool closed_form_exact = false;
  std::optional<double> heuristic_g;
  std::optional<double> upper_bound;
};

GramOperators build_gram(const HermitianOperator& op, const SpinorDecomposition& spinor,
                         int party);

/// One run of the alternating generalized-eigenvalue iteration from a seeded
/// random start. Never throws on non-convergence; check `converged`.
SQESolution alternating_solve(const HermitianOperator& op, const Partition& partition, int r,
                              std::uint64_t seed, const SolverOptions& options = {});

/// chi = (L - g) phi and the largest norm of <a_j^(bar q)|chi> over (j, q).
ResidualReport second_form_residual(const HermitianOperator& op,
                                    const SpinorDecomposition& spinor, double g);
ResidualReport second_form_residual(const HermitianOperator& op, const SQESolution& solution);

/// Largest SQE eigenvalue found over closed-form solvers (when their
/// structure is detected) and seeded multistart alternating runs.
GrResult g_r_max(const HermitianOperator& op, const Partition& partition, int r,
                 const SolverOptions& options = {});

/// Smallest SQE eigenvalue, as -g_r_max(-L).
double min_sqe_eigenvalue(const HermitianOperator& op, const Partition& partition, int r,
                          const SolverOptions& options = {});

// ---------------------------------------------------------------------------
// Closed forms

/// coefficient * |factors[0], ..., factors[n-1]>, one factor per party.
struct ProductTerm {
  cplx coefficient = 1.0;
  std::vector<Vector> factors;
};

/// True iff for every party q the complementary products of the terms are
/// pairwise orthonormal (within 1e-10). Factors are normalized first.
bool detect_opb(std::span<const ProductTerm> terms, const Partition& partition);

/// Closed form for L = |psi><psi| with psi = sum_k terms[k]: g is the sum of
/// the r largest |kappa_k|^2. Throws structure_not_applicable when the terms
/// are not an orthonormal product basis or do not reproduce L.
SQESolution solve_opb(const HermitianOperator& op, const Partition& partition,
                      std::vector<ProductTerm> terms, int r);

/// Searches local bases (computational, reduced-state eigenbases, per-qubit
/// Hadamard rotations, Fourier) for decompositions of psi in which every
/// complementary product set is orthonormal. Empty when none is found.
std::vector<std::vector<ProductTerm>> find_opb_decompositions(const PureState& psi,
                                                              const Partition& partition);

/// Reduction for operators block-diagonal in an orthonormal basis of one
/// party, L = sum_i K_i (x) |i><i|, and for rank-one operators whose
/// reduction has that form (purified branches combined over compositions of
/// r). Throws structure_not_applicable when neither structure is present.
SQESolution solve_partially_separable(const HermitianOperator& op, const Partition& partition,
                                      int r, const SolverOptions& options = {});

/// Tr over one party's block.
HermitianOperator reduced_operator(const HermitianOperator& op, const Partition& partition,
                                   int party);

/// For PSD L, g_1 of the reduced operator Tr_party L over the remaining
/// parties bounds g_1(L) from above. Used to verify product-state solutions.
double cascade_r1_bound(const HermitianOperator& op, const Partition& partition, int party,
                        const SolverOptions& options = {});

/// min over 2-block coarsenings of the partial Schmidt sums of psi; an upper
/// bound on g_r for L = |psi><psi|.
double rank_one_upper_bound(const PureState& psi, const Partition& partition, int r);

// ---------------------------------------------------------------------------
// Local transformations and the spinor-space identity

/// (U_1 (x) ... (x) U_n)(xi1 I + xi2 L)(U_1 (x) ... (x) U_n)^dagger with one
/// unitary per party block.
HermitianOperator local_transform(const HermitianOperator& op, const Partition& partition,
                                  std::span<const Matrix> unitaries, double xi1, double xi2);

/// Maps a solution of L to the corresponding solution of local_transform(L):
/// g' = xi1 + xi2 g, party vectors rotated by their unitaries.
SQESolution transform_solution(const SQESolution& solution, std::span<const Matrix> unitaries,
                               double xi1, double xi2);

struct SpinorSpaceCheck {
  double lhs = 0.0;  ///< <a^(1),...,a^(n)| L (x) s s^dagger |a^(1),...,a^(n)>
  double rhs = 0.0;  ///< <phi|L|phi>
};

inline constexpr Index kSpinorSpaceLimit = Index{1} << 20;

SpinorSpaceCheck spinor_space_expectation_check(const HermitianOperator& op,
                                                const SpinorDecomposition& spinor);

}  // namespace sqe
