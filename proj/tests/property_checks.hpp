#pragma once

// Randomized property checks shared by the unit suite and the acceptance
// binary. Each returns the worst violation seen over all draws.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sqe/scenarios.hpp"
#include "sqe/schmidt.hpp"
#include "sqe/sqe_solver.hpp"
#include "sqe/witness.hpp"

namespace props {

struct Outcome {
  int cases = 0;
  double worst = 0.0;
  std::string where;

  void record(double violation, const std::string& label) {
    ++cases;
    if (violation > worst) {
      worst = violation;
      where = label;
    }
  }
};

inline sqe::SolverOptions heuristic(int restarts = 32) {
  sqe::SolverOptions o;
  o.use_closed_forms = false;
  o.restarts = restarts;
  return o;
}

inline std::vector<sqe::Partition> multiparty(int n) {
  std::vector<sqe::Partition> out;
  for (auto& p : sqe::enumerate_partitions(n))
    if (p.party_count() >= 2) out.push_back(p);
  return out;
}

// Largest drop of g between consecutive single-party updates.
inline Outcome monotone_sweeps(int trials, std::uint64_t seed) {
  oracle::Rng rng(seed);
  Outcome out;
  sqe::SolverOptions o;
  o.record_history = true;
  const std::vector<std::vector<int>> shapes{{2, 2, 2}, {2, 3, 2}, {2, 2, 2, 2}};
  for (int t = 0; t < trials; ++t) {
    const sqe::SystemShape shape(shapes[t % shapes.size()]);
    const auto parts = multiparty(shape.size());
    const sqe::Partition& p = parts[rng.integer(0, static_cast<int>(parts.size()) - 1)];
    const sqe::HermitianOperator a(shape, rng.hermitian(shape.total_dim()));
    const int r = rng.integer(1, 3);
    const auto sol = sqe::alternating_solve(a, p, r, seed + t, o);
    double drop = sol.max_decrease;
    for (std::size_t k = 1; k < sol.history.size(); ++k)
      drop = std::max(drop, sol.history[k - 1] - sol.history[k]);
    out.record(drop, p.label() + " r=" + std::to_string(r));
  }
  return out;
}

// g_r <= g_{r+1} <= 1 for trace-one PSD operators, over the N = 4 lattice.
// Random operators at r = 2 often sit in flat regions that need a few
// thousand sweeps, hence the larger budget.
inline Outcome rank_monotonicity(int operators, std::uint64_t seed) {
  oracle::Rng rng(seed);
  Outcome out;
  sqe::SolverOptions o;
  o.max_iter = 5000;
  o.restarts = 16;
  const sqe::SystemShape shape({2, 2, 2, 2});
  for (int t = 0; t < operators; ++t) {
    const sqe::HermitianOperator a(shape, rng.psd(16, 1 + t % 3));
    for (const auto& p : multiparty(4)) {
      double prev = 0.0;
      for (int r = 1; r <= 3; ++r) {
        const double g = sqe::g_r_max(a, p, r, o).g;
        out.record(std::max(prev - g, g - 1.0), p.label() + " r=" + std::to_string(r));
        prev = g;
      }
    }
  }
  return out;
}

// Refinement: a lower bound on g_r(fine) never exceeds the exact g_r of a
// 2-block coarsening (Schmidt sum for rank-one operators).
inline Outcome refinement_monotonicity(int states, std::uint64_t seed) {
  oracle::Rng rng(seed);
  Outcome out;
  const sqe::SystemShape shape({2, 2, 2, 2});
  for (int t = 0; t < states; ++t) {
    const sqe::PureState psi(shape, rng.state(16));
    const auto op = sqe::HermitianOperator::projector(psi);
    for (const auto& fine : multiparty(4)) {
      const int r = 1 + t % 2;
      const double g = sqe::g_r_max(op, fine, r, heuristic(16)).g;
      for (const auto& coarse : sqe::two_block_coarsenings(fine))
        out.record(g - sqe::g_r_bipartite(psi, coarse, r), fine.label() + " <= " + coarse.label());
    }
  }
  return out;
}

// Every solution the solver reports carries a vanishing second-form residual.
inline Outcome reported_residuals(int operators, std::uint64_t seed) {
  oracle::Rng rng(seed);
  Outcome out;
  const sqe::SystemShape shape({2, 2, 2});
  for (int t = 0; t < operators; ++t) {
    const sqe::HermitianOperator a(shape, t % 2 ? rng.hermitian(8) : rng.psd(8, 2));
    for (const auto& p : multiparty(3))
      for (int r = 1; r <= 2; ++r) {
        const auto res = sqe::g_r_max(a, p, r);
        const auto check = sqe::second_form_residual(a, res.solution);
        out.record(std::max(res.solution.residual_orthogonality, check.orthogonality_violation),
                   p.label() + " r=" + std::to_string(r));
      }
  }
  const auto l = sqe::cluster_projector();
  for (const auto& p : multiparty(4))
    for (int r = 1; r <= 4; ++r) {
      const auto res = sqe::g_r_max(l, p, r);
      out.record(sqe::second_form_residual(l, res.solution).orthogonality_violation,
                 "cluster " + p.label() + " r=" + std::to_string(r));
    }
  return out;
}

// g_r of the transformed cluster projector against xi1 + xi2 * (exact g_r).
inline Outcome transform_covariance(int draws, std::uint64_t seed) {
  oracle::Rng rng(seed);
  Outcome out;
  const auto l = sqe::cluster_projector();
  const auto parts = multiparty(4);
  for (int t = 0; t < draws; ++t) {
    const sqe::Partition& p = parts[rng.integer(0, static_cast<int>(parts.size()) - 1)];
    const int r = rng.integer(1, 3);
    std::vector<sqe::Matrix> us;
    for (auto d : l.shape().party_dims(p)) us.push_back(rng.unitary(d));
    const double xi1 = rng.uniform(-2.0, 2.0), xi2 = rng.uniform(0.2, 3.0);
    const auto exact = sqe::g_r_max(l, p, r);
    const auto moved = sqe::local_transform(l, p, us, xi1, xi2);
    const double g = sqe::g_r_max(moved, p, r).g;
    out.record(std::abs(g - (xi1 + xi2 * exact.g)), p.label() + " r=" + std::to_string(r));
    const auto mapped = sqe::transform_solution(exact.solution, us, xi1, xi2);
    out.record(sqe::second_form_residual(moved, mapped).orthogonality_violation, "mapped " + p.label());
  }
  return out;
}

inline Outcome spinor_space_identity(int draws, std::uint64_t seed) {
  oracle::Rng rng(seed);
  Outcome out;
  const std::vector<std::vector<int>> shapes{{2, 2}, {2, 3}, {2, 2, 2}, {3, 2, 2}};
  for (int t = 0; t < draws; ++t) {
    const sqe::SystemShape shape(shapes[t % shapes.size()]);
    const auto parts = multiparty(shape.size());
    const sqe::Partition& p = parts[rng.integer(0, static_cast<int>(parts.size()) - 1)];
    const sqe::HermitianOperator a(shape, rng.hermitian(shape.total_dim()));
    sqe::SpinorDecomposition s;
    s.partition = p;
    s.rank = rng.integer(1, 3);
    for (auto d : shape.party_dims(p)) {
      s.party_vectors.emplace_back();
      for (int i = 0; i < s.rank; ++i) s.party_vectors.back().push_back(rng.vec(d));
    }
    const double norm = s.assemble_party_order().norm();
    for (auto& v : s.party_vectors[0]) v /= norm;
    const auto c = sqe::spinor_space_expectation_check(a, s);
    out.record(std::abs(c.lhs - c.rhs), p.label() + " r=" + std::to_string(s.rank));
  }
  return out;
}

// g_1 of random 2-qubit operators against a dense angular grid search.
inline Outcome two_qubit_grid(int operators, std::uint64_t seed) {
  oracle::Rng rng(seed);
  Outcome out;
  for (int t = 0; t < operators; ++t) {
    const sqe::Matrix m = rng.hermitian(4);
    const sqe::HermitianOperator a(sqe::SystemShape({2, 2}), m);
    const double g = sqe::g_r_max(a, sqe::Partition::parse("1:2"), 1, heuristic()).g;
    out.record(std::abs(g - oracle::product_max_2qubit(m)), "operator " + std::to_string(t));
  }
  return out;
}

// Alternating solver alone against Schmidt sums, every bipartition and r.
inline Outcome bipartite_cross_oracle(int states, std::uint64_t seed) {
  oracle::Rng rng(seed);
  Outcome out;
  const sqe::SystemShape shape({2, 2, 2, 2});
  for (int t = 0; t < states; ++t) {
    const sqe::PureState psi(shape, rng.state(16));
    const auto op = sqe::HermitianOperator::projector(psi);
    for (const auto& p : sqe::two_block_coarsenings(sqe::Partition::singletons(4))) {
      const int rank = sqe::bipartite_schmidt(psi, p).rank;
      for (int r = 1; r <= rank; ++r) {
        const double g = sqe::g_r_max(op, p, r, heuristic()).g;
        out.record(std::abs(g - sqe::g_r_bipartite(psi, p, r)),
                   "state " + std::to_string(t) + " " + p.label() + " r=" + std::to_string(r));
      }
    }
  }
  return out;
}

}  // namespace props
