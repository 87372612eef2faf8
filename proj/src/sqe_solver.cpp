#include <cmath>
#include <exception>
#include <limits>
#include <random>

#include <Eigen/Eigenvalues>

#include "solver_detail.hpp"
#include "sqe/error.hpp"

namespace sqe {

namespace detail {

namespace {

constexpr double kRangeCutoff = 1e-10;
constexpr double kDegeneracyTol = 1e-12;
constexpr int kMaxReinitializations = 16;

class SpinorRng {
 public:
  explicit SpinorRng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  Vector gaussian(Index dim) {
    Vector v(dim);
    for (Index k = 0; k < dim; ++k) v(k) = cplx(normal_(engine_), normal_(engine_));
    return v;
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

Spinor random_spinor(const std::vector<Index>& dims, int r, SpinorRng& rng) {
  Spinor s(dims.size());
  for (std::size_t q = 0; q < dims.size(); ++q) {
    Matrix cols(dims[q], r);
    for (int i = 0; i < r; ++i) cols.col(i) = rng.gaussian(dims[q]);
    const Index k = std::min<Index>(dims[q], r);
    Eigen::HouseholderQR<Matrix> qr(cols.leftCols(k));
    const Matrix q_thin = qr.householderQ() * Matrix::Identity(dims[q], k);
    for (int i = 0; i < r; ++i)
      s[q].push_back(i < k ? Vector(q_thin.col(i)) : Vector(cols.col(i).normalized()));
  }
  return s;
}

double rayleigh(const Matrix& op, const Vector& phi) {
  const double n2 = phi.squaredNorm();
  if (n2 == 0.0) return 0.0;
  return (phi.dot(op * phi)).real() / n2;
}

// Equal party-vector norms inside every term.
void balance_gauge(Spinor& s) {
  const std::size_t n = s.size();
  for (std::size_t i = 0; i < s.front().size(); ++i) {
    double log_sum = 0.0;
    bool zero = false;
    for (std::size_t q = 0; q < n; ++q) {
      const double norm = s[q][i].norm();
      if (norm == 0.0) {
        zero = true;
        break;
      }
      log_sum += std::log(norm);
    }
    if (zero) continue;
    const double target = std::exp(log_sum / static_cast<double>(n));
    for (std::size_t q = 0; q < n; ++q) s[q][i] *= target / s[q][i].norm();
  }
}

enum class StepStatus { kOk, kDegenerateGram };

StepStatus update_party(const Problem& problem, Spinor& s, int q, double& g) {
  const Index dq = problem.dims[q];
  const int r = static_cast<int>(s[q].size());
  const Matrix map = linear_map(s, problem.dims, q);
  const Matrix i_bar = map.adjoint() * map;
  const Matrix l_bar = map.adjoint() * problem.op * map;

  Eigen::SelfAdjointEigenSolver<Matrix> gram(i_bar);
  const Eigen::VectorXd& lam = gram.eigenvalues();
  const double lam_max = lam(lam.size() - 1);
  if (!(lam_max > 0.0)) return StepStatus::kDegenerateGram;
  std::vector<Index> kept;
  for (Index k = 0; k < lam.size(); ++k)
    if (lam(k) > kRangeCutoff * lam_max) kept.push_back(k);
  const Index rank = static_cast<Index>(kept.size());
  Matrix u(i_bar.rows(), rank);
  Eigen::VectorXd lam_k(rank);
  for (Index k = 0; k < rank; ++k) {
    u.col(k) = gram.eigenvectors().col(kept[k]);
    lam_k(k) = lam(kept[k]);
  }
  const Matrix w = u * lam_k.cwiseInverse().cwiseSqrt().asDiagonal();
  Matrix h = w.adjoint() * l_bar * w;
  h = 0.5 * (h + h.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
  const Eigen::VectorXd& mu = eig.eigenvalues();
  const double top = mu(rank - 1);

  Vector a_prev(r * dq);
  for (int i = 0; i < r; ++i) a_prev.segment(i * dq, dq) = s[q][i];
  const Vector y_prev = lam_k.cwiseSqrt().asDiagonal() * (u.adjoint() * a_prev);

  Index first_top = rank - 1;
  const double degeneracy = kDegeneracyTol * std::max(1.0, std::abs(top));
  while (first_top > 0 && top - mu(first_top - 1) <= degeneracy) --first_top;
  const Matrix top_space = eig.eigenvectors().rightCols(rank - first_top);
  Vector y = top_space * (top_space.adjoint() * y_prev);
  if (y.norm() < 1e-8 * std::max(1.0, y_prev.norm()))
    y = eig.eigenvectors().col(rank - 1);
  y.normalize();

  const Vector a = w * y;
  for (int i = 0; i < r; ++i) s[q][i] = a.segment(i * dq, dq);
  g = top;
  return StepStatus::kOk;
}

}  // namespace

Candidate alternating_core(const Problem& problem, int r, std::uint64_t seed,
                           const SolverOptions& options) {
  require(r >= 1, ErrorKind::kInvalidArgument, "rank r must be at least 1");
  require(options.max_iter >= 1, ErrorKind::kInvalidArgument, "max_iter must be at least 1");
  std::uint64_t stream = seed;
  for (int attempt = 0; attempt < kMaxReinitializations; ++attempt) {
    SpinorRng rng(stream);
    stream = splitmix64(stream);
    Spinor s = random_spinor(problem.dims, r, rng);
    Vector phi = assemble(s, problem.dims);
    const double norm = phi.norm();
    if (!(norm > 0.0)) continue;
    for (auto& v : s[0]) v /= norm;
    double g = rayleigh(problem.op, phi);

    Candidate run;
    run.converged = false;
    bool degenerate = false;
    for (int sweep = 1; sweep <= options.max_iter; ++sweep) {
      const double g_start = g;
      for (int q = 0; q < problem.parties(); ++q) {
        double g_new = g;
        if (update_party(problem, s, q, g_new) == StepStatus::kDegenerateGram) {
          degenerate = true;
          break;
        }
        run.max_decrease = std::max(run.max_decrease, g - g_new);
        g = g_new;
        if (options.record_history) run.history.push_back(g);
      }
      if (degenerate) break;
      balance_gauge(s);
      run.sweeps = sweep;
      if (std::abs(g - g_start) < options.tol) {
        const double orth = residual(problem, s, g).orthogonality_violation;
        if (orth < options.orthogonality_tol) {
          run.converged = true;
          break;
        }
      }
    }
    if (degenerate) continue;
    run.g = rayleigh(problem.op, assemble(s, problem.dims));
    run.spinor = std::move(s);
    run.method = SolveMethod::kAlternating;
    run.restarts = 1;
    return run;
  }
  fail(ErrorKind::kSolverFailure, "alternating solver could not leave a degenerate start");
}

Candidate multistart_core(const Problem& problem, int r, const SolverOptions& options) {
  require(options.restarts >= 1, ErrorKind::kInvalidArgument, "restarts must be at least 1");
  const int count = options.restarts;
  std::vector<std::optional<Candidate>> runs(count);
  std::vector<std::exception_ptr> errors(count);
  parallel_for(count, options.threads, [&](int k) {
    try {
      runs[k] = alternating_core(problem, r, splitmix64(options.seed + static_cast<std::uint64_t>(k)),
                                 options);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  });
  for (const auto& e : errors)
    if (e) {
      try {
        std::rethrow_exception(e);
      } catch (const Error& err) {
        if (err.kind() != ErrorKind::kSolverFailure) throw;
      }
    }

  int best = -1, best_any = -1;
  for (int k = 0; k < count; ++k) {
    if (!runs[k]) continue;
    if (best_any < 0 || runs[k]->g > runs[best_any]->g) best_any = k;
    if (runs[k]->converged && (best < 0 || runs[k]->g > runs[best]->g)) best = k;
  }
  if (best < 0) {
    const double partial = best_any >= 0 ? runs[best_any]->g
                                         : std::numeric_limits<double>::quiet_NaN();
    throw SolverFailure("no restart of the alternating solver converged", partial);
  }
  Candidate out = std::move(*runs[best]);
  out.restarts = count;
  return out;
}

Candidate solve_core(const Problem& problem, int r, const SolverOptions& options) {
  if (options.use_closed_forms) {
    if (auto closed = closed_form_core(problem, r, options); closed && closed->exact)
      return *closed;
  }
  return multistart_core(problem, r, options);
}

}  // namespace detail

namespace detail {

SQESolution to_solution(const detail::Problem& problem, const Partition& partition, int r,
                        detail::Candidate c) {
  SQESolution out;
  out.g = c.g;
  out.spinor.partition = partition;
  out.spinor.rank = r;
  const auto report = detail::residual(problem, c.spinor, c.g);
  out.spinor.party_vectors = std::move(c.spinor);
  out.residual_norm = report.residual_norm;
  out.residual_orthogonality = report.orthogonality_violation;
  out.converged = c.converged;
  out.restarts_used = c.restarts;
  out.sweeps = c.sweeps;
  out.method = c.method;
  out.history = std::move(c.history);
  out.max_decrease = c.max_decrease;
  return out;
}

}  // namespace detail

namespace {

void check_problem(const HermitianOperator& op, const Partition& partition, int r) {
  require(partition.subsystem_count() == op.shape().size(), ErrorKind::kInvalidShape,
          "partition does not cover the operator's subsystems");
  require(r >= 1, ErrorKind::kInvalidArgument, "rank r must be at least 1");
}

constexpr double kCrossCheckTol = 1e-8;

}  // namespace

SQESolution alternating_solve(const HermitianOperator& op, const Partition& partition, int r,
                              std::uint64_t seed, const SolverOptions& options) {
  check_problem(op, partition, r);
  const auto problem = detail::make_problem(op, partition);
  return detail::to_solution(problem, partition, r, detail::alternating_core(problem, r, seed, options));
}

GrResult g_r_max(const HermitianOperator& op, const Partition& partition, int r,
                 const SolverOptions& options) {
  check_problem(op, partition, r);
  require(options.use_closed_forms || options.use_heuristic, ErrorKind::kInvalidArgument,
          "at least one of closed forms and the heuristic must be enabled");
  const auto problem = detail::make_problem(op, partition);

  GrResult out;
  std::optional<detail::Candidate> closed;
  if (options.use_closed_forms) closed = detail::closed_form_core(problem, r, options);
  if (closed) {
    out.closed_form_g = closed->g;
    out.closed_form_exact = closed->exact;
  }
  if (auto psi = detail::rank_one_vector(problem.op))
    out.upper_bound = detail::upper_bound_rank_one(*psi, problem.dims, r);

  std::optional<detail::Candidate> heuristic;
  if (options.use_heuristic) {
    try {
      heuristic = detail::multistart_core(problem, r, options);
      out.heuristic_g = heuristic->g;
    } catch (const SolverFailure&) {
      if (!closed) throw;
    }
  }

  detail::Candidate best;
  if (closed && heuristic) {
    best = heuristic->g > closed->g + kCrossCheckTol ? *heuristic : *closed;
    best.restarts = heuristic->restarts;
  } else {
    best = closed ? *closed : *heuristic;
  }
  out.g = best.g;
  out.method = best.method;
  out.exact = closed && closed->exact && best.method != SolveMethod::kAlternating;
  out.solution = detail::to_solution(problem, partition, r, std::move(best));
  return out;
}

double min_sqe_eigenvalue(const HermitianOperator& op, const Partition& partition, int r,
                          const SolverOptions& options) {
  const HermitianOperator negated(op.shape(), -op.matrix());
  return -g_r_max(negated, partition, r, options).g;
}

}  // namespace sqe
