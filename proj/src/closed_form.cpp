#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>

#include "solver_detail.hpp"
#include "sqe/error.hpp"
#include "sqe/schmidt.hpp"

namespace sqe {

namespace detail {

namespace {

constexpr double kStructureTol = 1e-10;
constexpr double kExactTol = 1e-10;
constexpr Index kDenseStructureLimit = 1024;
constexpr std::size_t kMaxBasisCombinations = 4096;
constexpr std::size_t kMaxBranches = 4096;

std::vector<int> int_dims(const std::vector<Index>& dims) {
  return std::vector<int>(dims.begin(), dims.end());
}

std::vector<Index> without(const std::vector<Index>& dims, int party) {
  std::vector<Index> out;
  for (int p = 0; p < static_cast<int>(dims.size()); ++p)
    if (p != party) out.push_back(dims[p]);
  return out;
}

std::vector<int> other_parties(int n, std::initializer_list<int> skip) {
  std::vector<int> out;
  for (int p = 0; p < n; ++p)
    if (std::find(skip.begin(), skip.end(), p) == skip.end()) out.push_back(p);
  return out;
}

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

// Top eigenpair of a Hermitian matrix.
std::pair<double, Vector> top_eigen(const Matrix& op) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(op);
  const Index last = op.rows() - 1;
  return {eig.eigenvalues()(last), eig.eigenvectors().col(last)};
}

// Spinor whose first terms are the given product vectors; the rest are zero.
Spinor pad_terms(const std::vector<Index>& dims, int r,
                 const std::vector<std::vector<Vector>>& terms) {
  Spinor s = zero_spinor(dims, r);
  for (std::size_t j = 0; j < terms.size() && static_cast<int>(j) < r; ++j)
    for (std::size_t q = 0; q < dims.size(); ++q) s[q][j] = terms[j][q];
  return s;
}

// Expands v over the computational basis of every party but `keep`.
std::vector<std::vector<Vector>> expand_except(const Vector& v, const std::vector<Index>& dims,
                                               int keep) {
  const Matrix front = party_front_matrix(v, dims, keep);
  const auto rest = without(dims, keep);
  std::vector<std::vector<Vector>> terms;
  const SystemShape rest_shape(int_dims(rest));
  for (Index c = 0; c < front.cols(); ++c) {
    if (front.col(c).norm() == 0.0) continue;
    const auto digits = rest_shape.unravel(c);
    std::vector<Vector> factors;
    int k = 0;
    for (int p = 0; p < static_cast<int>(dims.size()); ++p) {
      if (p == keep) {
        factors.push_back(front.col(c));
      } else {
        factors.push_back(basis_vector(dims[p], digits[k++]));
      }
    }
    terms.push_back(std::move(factors));
  }
  return terms;
}

Candidate exact_candidate(double g, Spinor s, SolveMethod method) {
  Candidate c;
  c.g = g;
  c.spinor = std::move(s);
  c.exact = true;
  c.method = method;
  return c;
}

// Sum of the r largest squared Schmidt coefficients of psi split as rows x cols.
double schmidt_partial_sum(const Vector& psi, Index rows, Index cols, int r) {
  Eigen::JacobiSVD<Matrix> svd(
      Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          psi.data(), rows, cols));
  const auto& s = svd.singularValues();
  double g = 0.0;
  for (Index k = 0; k < std::min<Index>(r, s.size()); ++k) g += s(k) * s(k);
  return g;
}

// Best r-term approximation of a two-party vector, normalized.
Candidate schmidt_candidate(const Vector& psi, const std::vector<Index>& dims, int r) {
  const auto sd = schmidt_of_matrix(psi, dims[0], dims[1]);
  std::vector<std::vector<Vector>> terms;
  double g = 0.0;
  for (int k = 0; k < r && k < static_cast<int>(sd.coefficients.size()); ++k) {
    if (sd.coefficients[k] <= 0.0) break;
    g += sd.coefficients[k] * sd.coefficients[k];
    terms.push_back({sd.coefficients[k] * sd.left_vectors[k], sd.right_vectors[k]});
  }
  const double norm = std::sqrt(g);
  for (auto& t : terms) t[0] /= norm;
  return exact_candidate(g, pad_terms(dims, r, terms), SolveMethod::kClosedFormOpb);
}

Matrix hadamard() {
  Matrix h(2, 2);
  h << 1.0, 1.0, 1.0, -1.0;
  return h / std::sqrt(2.0);
}

Matrix fourier(Index d) {
  Matrix f(d, d);
  for (Index j = 0; j < d; ++j)
    for (Index k = 0; k < d; ++k)
      f(j, k) = std::polar(1.0 / std::sqrt(static_cast<double>(d)),
                           2.0 * std::numbers::pi * static_cast<double>(j * k) / d);
  return f;
}

std::vector<Matrix> candidate_bases(const Vector& psi, const std::vector<Index>& dims,
                                    const std::vector<int>& local_dims, int party) {
  const Index d = dims[party];
  std::vector<Matrix> out{Matrix::Identity(d, d)};
  const Matrix front = party_front_matrix(psi, dims, party);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(front * front.adjoint());
  out.push_back(eig.eigenvectors().rowwise().reverse());
  const bool qubits = std::all_of(local_dims.begin(), local_dims.end(), [](int k) { return k == 2; });
  const int k = static_cast<int>(local_dims.size());
  if (qubits && k <= 3) {
    for (int mask = 1; mask < (1 << k); ++mask) {
      Matrix u = Matrix::Identity(1, 1);
      for (int b = 0; b < k; ++b)
        u = kron(u, (mask >> (k - 1 - b)) & 1 ? hadamard() : Matrix(Matrix::Identity(2, 2)));
      out.push_back(u);
    }
  }
  if (d > 2) out.push_back(fourier(d));
  return out;
}

struct Branch {
  std::vector<int> digits;  // indices over the non-free parties
  Vector free_part;
};

// Orthonormal product decompositions with one party left free.
std::vector<std::vector<ProductTerm>> opb_search(const Vector& psi, const std::vector<Index>& dims,
                                                 const std::vector<std::vector<int>>& local_dims) {
  const int n = static_cast<int>(dims.size());
  const double scale = psi.squaredNorm();
  std::vector<std::vector<ProductTerm>> found;
  std::vector<std::vector<double>> profiles;
  if (scale == 0.0) return found;

  std::vector<std::vector<Matrix>> bases(n);
  for (int p = 0; p < n; ++p) bases[p] = candidate_bases(psi, dims, local_dims[p], p);

  for (int f = 0; f < n; ++f) {
    const auto others = other_parties(n, {f});
    std::size_t combos = 1;
    for (int p : others) combos *= bases[p].size();
    combos = std::min(combos, kMaxBasisCombinations);
    const SystemShape rest_shape(int_dims(without(dims, f)));
    for (std::size_t combo = 0; combo < combos; ++combo) {
      std::vector<const Matrix*> chosen(n, nullptr);
      Vector rotated = psi;
      std::size_t code = combo;
      for (int p : others) {
        chosen[p] = &bases[p][code % bases[p].size()];
        code /= bases[p].size();
        rotated = apply_local(rotated, dims, p, chosen[p]->adjoint());
      }
      const Matrix front = party_front_matrix(rotated, dims, f);
      std::vector<Branch> branches;
      bool too_many = false;
      for (Index c = 0; c < front.cols(); ++c) {
        if (front.col(c).squaredNorm() <= 1e-20 * scale) continue;
        if (branches.size() >= kMaxBranches) {
          too_many = true;
          break;
        }
        branches.push_back({rest_shape.unravel(c), front.col(c)});
      }
      if (too_many) continue;
      bool valid = true;
      for (std::size_t a = 0; a < branches.size() && valid; ++a)
        for (std::size_t b = a + 1; b < branches.size() && valid; ++b) {
          int differing = 0;
          for (std::size_t k = 0; k < branches[a].digits.size(); ++k)
            differing += branches[a].digits[k] != branches[b].digits[k];
          if (differing == 1 &&
              std::abs(branches[a].free_part.dot(branches[b].free_part)) > kStructureTol * scale)
            valid = false;
        }
      if (!valid) continue;

      std::vector<ProductTerm> terms;
      for (const auto& br : branches) {
        ProductTerm t;
        const double kappa = br.free_part.norm();
        t.coefficient = kappa;
        int k = 0;
        for (int p = 0; p < n; ++p) {
          if (p == f)
            t.factors.push_back(br.free_part / kappa);
          else
            t.factors.push_back(chosen[p]->col(br.digits[k++]));
        }
        terms.push_back(std::move(t));
      }
      std::sort(terms.begin(), terms.end(), [](const ProductTerm& a, const ProductTerm& b) {
        return std::abs(a.coefficient) > std::abs(b.coefficient);
      });
      std::vector<double> profile;
      for (const auto& t : terms) profile.push_back(std::norm(t.coefficient));
      const bool seen = std::any_of(profiles.begin(), profiles.end(), [&](const auto& other) {
        if (other.size() != profile.size()) return false;
        for (std::size_t k = 0; k < other.size(); ++k)
          if (std::abs(other[k] - profile[k]) > 1e-12 * scale) return false;
        return true;
      });
      if (seen) continue;
      profiles.push_back(std::move(profile));
      found.push_back(std::move(terms));
    }
  }
  return found;
}

// phi built from the r largest terms of an orthonormal product decomposition.
Candidate opb_candidate(const std::vector<ProductTerm>& terms, const std::vector<Index>& dims,
                        int r) {
  std::vector<std::vector<Vector>> chosen;
  double g = 0.0;
  for (int k = 0; k < r && k < static_cast<int>(terms.size()); ++k) {
    g += std::norm(terms[k].coefficient);
    auto factors = terms[k].factors;
    factors[0] *= terms[k].coefficient;
    chosen.push_back(std::move(factors));
  }
  const double norm = std::sqrt(g);
  for (auto& t : chosen) t[0] /= norm;
  Candidate c;
  c.g = g;
  c.spinor = pad_terms(dims, r, chosen);
  c.method = SolveMethod::kClosedFormOpb;
  return c;
}

// Basis of party m in which op is block diagonal, when one exists.
std::optional<Matrix> find_block_basis(const Matrix& op, const std::vector<Index>& dims, int m) {
  const Index d = dims[m];
  if (d == 1) return Matrix::Identity(1, 1);
  const Index rest = op.rows() / d;
  if (op.rows() > kDenseStructureLimit) return std::nullopt;
  std::vector<int> perm = other_parties(static_cast<int>(dims.size()), {m});
  perm.push_back(m);
  const SystemShape shape(int_dims(dims));
  const Matrix moved = permute_subsystems(op, shape, perm);

  Matrix s(rest * rest, d * d);
  for (Index x = 0; x < rest; ++x)
    for (Index y = 0; y < rest; ++y)
      for (Index a = 0; a < d; ++a)
        for (Index b = 0; b < d; ++b) s(x * rest + y, a * d + b) = moved(x * d + a, y * d + b);
  const Matrix gram = s.transpose() * s.conjugate();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  const double top = eig.eigenvalues().maxCoeff();
  const double scale = std::max(1.0, max_abs(op));
  if (!(top > 0.0)) return Matrix(Matrix::Identity(d, d));

  std::mt19937_64 engine(0x5eedULL);
  std::uniform_real_distribution<double> coeff(0.5, 1.5);
  Matrix h = Matrix::Zero(d, d);
  for (Index j = 0; j < eig.eigenvalues().size(); ++j) {
    if (eig.eigenvalues()(j) <= 1e-12 * top) continue;
    Matrix a(d, d);
    for (Index k = 0; k < d * d; ++k) a(k / d, k % d) = eig.eigenvectors()(k, j);
    h += coeff(engine) * (a + a.adjoint()) + coeff(engine) * cplx(0.0, 1.0) * (a - a.adjoint());
  }
  Eigen::SelfAdjointEigenSolver<Matrix> basis(h);
  const Matrix u = basis.eigenvectors();

  for (Index x = 0; x < rest; ++x)
    for (Index y = 0; y < rest; ++y) {
      Matrix block = u.adjoint() * moved.block(x * d, y * d, d, d) * u;
      block.diagonal().setZero();
      if (max_abs(block) > kStructureTol * scale) return std::nullopt;
    }
  return u;
}

// Diagonal block i of op in basis u of party m, on the remaining parties.
Matrix diagonal_block(const Matrix& op, const std::vector<Index>& dims, int m, const Vector& u) {
  std::vector<int> perm = other_parties(static_cast<int>(dims.size()), {m});
  perm.push_back(m);
  const Matrix moved = permute_subsystems(op, SystemShape(int_dims(dims)), perm);
  const Index d = dims[m];
  const Index rest = op.rows() / d;
  Matrix k(rest, rest);
  for (Index x = 0; x < rest; ++x)
    for (Index y = 0; y < rest; ++y)
      k(x, y) = u.dot(moved.block(x * d, y * d, d, d) * u);
  return k;
}

Spinor insert_party(const Spinor& sub, const std::vector<Index>& dims, int m, const Vector& u) {
  const int r = static_cast<int>(sub.front().size());
  Spinor s(dims.size());
  int k = 0;
  for (int p = 0; p < static_cast<int>(dims.size()); ++p) {
    if (p == m) {
      s[p].assign(r, u);
    } else {
      s[p] = sub[k++];
    }
  }
  return s;
}

std::optional<Candidate> block_candidate(const Problem& problem, int r,
                                         const SolverOptions& options) {
  const int n = problem.parties();
  if (n < 2) return std::nullopt;
  std::optional<Candidate> best;
  for (int m = 0; m < n; ++m) {
    const auto u = find_block_basis(problem.op, problem.dims, m);
    if (!u) continue;
    const auto others = other_parties(n, {m});
    std::vector<Matrix> seen;
    std::optional<Candidate> here;
    bool all_exact = true;
    for (Index i = 0; i < u->cols(); ++i) {
      Matrix k = diagonal_block(problem.op, problem.dims, m, u->col(i));
      k = 0.5 * (k + k.adjoint()).eval();
      const bool repeat = std::any_of(seen.begin(), seen.end(), [&](const Matrix& o) {
        return max_abs(o - k) <= 1e-13 * std::max(1.0, max_abs(k));
      });
      if (repeat) continue;
      seen.push_back(k);
      const Problem sub = sub_problem(k, problem, others);
      Candidate c;
      if (max_abs(k) == 0.0) {
        std::vector<std::vector<Vector>> term(1);
        for (Index d : sub.dims) term[0].push_back(basis_vector(d, 0));
        c = exact_candidate(0.0, pad_terms(sub.dims, r, term), SolveMethod::kPartiallySeparable);
      } else {
        c = solve_core(sub, r, options);
      }
      all_exact = all_exact && c.exact;
      if (!here || c.g > here->g) {
        c.spinor = insert_party(c.spinor, problem.dims, m, u->col(i));
        here = std::move(c);
      }
    }
    if (!here) continue;
    here->exact = all_exact;
    here->method = SolveMethod::kPartiallySeparable;
    if (!best || (here->exact && !best->exact) ||
        (here->exact == best->exact && here->g > best->g))
      best = std::move(here);
    if (best->exact) break;
  }
  return best;
}

// g_k and an optimal normalized spinor for psi psi^dagger on `dims`, k = 1..r.
std::vector<Candidate> branch_values(const Vector& psi, const std::vector<Index>& dims,
                                     const std::vector<std::vector<int>>& local_dims, int r,
                                     const SolverOptions& options) {
  std::vector<Candidate> out;
  const int n = static_cast<int>(dims.size());
  for (int k = 1; k <= r; ++k) {
    if (n == 1) {
      out.push_back(exact_candidate(psi.squaredNorm(), pad_terms(dims, k, {{psi.normalized()}}),
                                    SolveMethod::kPartiallySeparable));
    } else if (n == 2) {
      out.push_back(schmidt_candidate(psi, dims, k));
    } else {
      Problem sub{psi * psi.adjoint(), dims, local_dims};
      out.push_back(solve_core(sub, k, options));
    }
  }
  return out;
}

std::optional<Candidate> purification_candidate(const Vector& psi, const Problem& problem, int r,
                                                const SolverOptions& options) {
  const int n = problem.parties();
  if (n < 3) return std::nullopt;
  const auto& dims = problem.dims;
  const double scale = psi.squaredNorm();
  std::optional<Candidate> best;
  for (int t = 0; t < n; ++t) {
    const Matrix mt = party_front_matrix(psi, dims, t);
    const Matrix reduced = mt.transpose() * mt.conjugate();
    const auto rest_dims = without(dims, t);
    for (int m = 0; m < n; ++m) {
      if (m == t) continue;
      const int m_in_rest = m - (m > t ? 1 : 0);
      const auto u = find_block_basis(reduced, rest_dims, m_in_rest);
      if (!u) continue;

      const auto dims_wo_m = without(dims, m);
      const int t_in = t - (t > m ? 1 : 0);
      const auto rest2 = other_parties(n, {m, t});
      std::vector<Index> rest2_dims;
      std::vector<std::vector<int>> rest2_local;
      for (int p : rest2) {
        rest2_dims.push_back(dims[p]);
        rest2_local.push_back(problem.local_dims[p]);
      }
      struct Piece {
        Vector u, e, psi;
      };
      std::vector<Piece> pieces;
      bool valid = true;
      for (Index i = 0; i < u->cols() && valid; ++i) {
        const Vector w = contract_party(psi, dims, m, u->col(i));
        if (w.squaredNorm() <= 1e-20 * scale) continue;
        const Matrix front = party_front_matrix(w, dims_wo_m, t_in);
        Vector flat(front.size());
        for (Index a = 0; a < front.rows(); ++a)
          for (Index b = 0; b < front.cols(); ++b) flat(a * front.cols() + b) = front(a, b);
        const auto sd = schmidt_of_matrix(flat, front.rows(), front.cols());
        if (sd.coefficients.size() > 1 &&
            sd.coefficients[1] * sd.coefficients[1] > kStructureTol * scale) {
          valid = false;
          break;
        }
        Piece piece{u->col(i), sd.left_vectors[0], sd.coefficients[0] * sd.right_vectors[0]};
        for (const auto& other : pieces)
          if (std::abs(other.e.dot(piece.e)) > 1e-9) valid = false;
        pieces.push_back(std::move(piece));
      }
      if (!valid || pieces.empty()) continue;

      // best[k]: largest sum over branches using k terms in total.
      const int nb = static_cast<int>(pieces.size());
      std::vector<std::vector<Candidate>> values;
      for (const auto& pc : pieces)
        values.push_back(branch_values(pc.psi, rest2_dims, rest2_local, r, options));
      std::vector<std::vector<double>> table(nb + 1, std::vector<double>(r + 1, -1.0));
      std::vector<std::vector<int>> choice(nb + 1, std::vector<int>(r + 1, 0));
      table[0][0] = 0.0;
      for (int b = 0; b < nb; ++b)
        for (int k = 0; k <= r; ++k) {
          if (table[b][k] < 0.0) continue;
          for (int use = 0; use + k <= r; ++use) {
            const double add = use == 0 ? 0.0 : values[b][use - 1].g;
            if (table[b][k] + add > table[b + 1][k + use]) {
              table[b + 1][k + use] = table[b][k] + add;
              choice[b + 1][k + use] = use;
            }
          }
        }
      int total = 0;
      for (int k = 1; k <= r; ++k)
        if (table[nb][k] > table[nb][total]) total = k;
      const double g = table[nb][total];
      if (!(g > 0.0)) continue;

      std::vector<std::vector<Vector>> terms;
      for (int b = nb, k = total; b > 0; --b) {
        const int use = choice[b][k];
        k -= use;
        if (use == 0) continue;
        const Candidate& sub = values[b - 1][use - 1];
        const Vector phi = assemble(sub.spinor, rest2_dims);
        const cplx overlap = pieces[b - 1].psi.dot(phi);
        const cplx phase = std::abs(overlap) > 0.0 ? std::conj(overlap) / std::abs(overlap) : 1.0;
        const double weight = std::sqrt(sub.g / g);
        for (int j = 0; j < use; ++j) {
          std::vector<Vector> factors(n);
          factors[m] = pieces[b - 1].u;
          factors[t] = pieces[b - 1].e;
          for (std::size_t p = 0; p < rest2.size(); ++p) factors[rest2[p]] = sub.spinor[p][j];
          factors[m] *= weight * phase;
          terms.push_back(std::move(factors));
        }
      }
      Candidate c;
      c.g = g;
      c.spinor = pad_terms(dims, r, terms);
      c.method = SolveMethod::kPartiallySeparable;
      if (!best || c.g > best->g) best = std::move(c);
    }
  }
  return best;
}

}  // namespace

std::optional<Vector> rank_one_vector(const Matrix& op) {
  if (op.rows() == 0) return std::nullopt;
  Index j = 0;
  const double pivot = op.diagonal().real().maxCoeff(&j);
  if (!(pivot > 0.0)) return std::nullopt;
  const Vector psi = op.col(j) / std::sqrt(pivot);
  const double scale = std::max(1.0, max_abs(op));
  if (max_abs(op - psi * psi.adjoint()) > kStructureTol * scale) return std::nullopt;
  return psi;
}

double upper_bound_rank_one(const Vector& psi, const std::vector<Index>& dims, int r) {
  const int n = static_cast<int>(dims.size());
  if (n == 1) return psi.squaredNorm();
  const SystemShape shape(int_dims(dims));
  double bound = psi.squaredNorm();
  for (const auto& cut : two_block_coarsenings(Partition::singletons(n))) {
    std::vector<int> perm;
    Index rows = 1;
    for (int p : cut.block(0)) {
      perm.push_back(p);
      rows *= dims[p];
    }
    for (int p : cut.block(1)) perm.push_back(p);
    const Vector moved = permute_subsystems(psi, shape, perm);
    bound = std::min(bound, schmidt_partial_sum(moved, rows, moved.size() / rows, r));
  }
  return bound;
}

std::optional<Candidate> closed_form_core(const Problem& problem, int r,
                                          const SolverOptions& options) {
  const int n = problem.parties();
  const auto& dims = problem.dims;
  if (n == 1) {
    auto [g, v] = top_eigen(problem.op);
    return exact_candidate(g, pad_terms(dims, r, {{v}}), SolveMethod::kClosedFormOpb);
  }

  int largest = 0;
  for (int p = 1; p < n; ++p)
    if (dims[p] > dims[largest]) largest = p;
  const Index others = problem.total() / dims[largest];
  if (others <= r && problem.total() <= kDenseStructureLimit) {
    auto [g, v] = top_eigen(problem.op);
    return exact_candidate(g, pad_terms(dims, r, expand_except(v, dims, largest)),
                           SolveMethod::kClosedFormOpb);
  }

  if (auto psi = rank_one_vector(problem.op)) {
    if (n == 2) return schmidt_candidate(*psi, dims, r);
    const double bound = upper_bound_rank_one(*psi, dims, r);
    std::optional<Candidate> best;
    auto consider = [&](std::optional<Candidate> c) {
      if (!c) return;
      c->exact = std::abs(c->g - bound) <= kExactTol * std::max(1.0, bound);
      if (!best || c->g > best->g + kExactTol || (c->exact && !best->exact)) best = std::move(c);
    };
    for (const auto& terms : opb_search(*psi, dims, problem.local_dims)) {
      consider(opb_candidate(terms, dims, r));
      if (best && best->exact) return best;
    }
    consider(purification_candidate(*psi, problem, r, options));
    if (best && best->exact) return best;
    consider(block_candidate(problem, r, options));
    return best;
  }
  return block_candidate(problem, r, options);
}

}  // namespace detail

namespace {

constexpr double kOpbTol = 1e-10;

std::vector<ProductTerm> normalized_terms(std::vector<ProductTerm> terms) {
  for (auto& t : terms)
    for (auto& f : t.factors) {
      const double norm = f.norm();
      require(norm > 0.0, ErrorKind::kInvalidArgument, "product term with a zero factor");
      t.coefficient *= norm;
      f /= norm;
    }
  return terms;
}

}  // namespace

bool detect_opb(std::span<const ProductTerm> terms, const Partition& partition) {
  const int n = partition.party_count();
  std::vector<ProductTerm> normed;
  for (const auto& t : terms) {
    if (static_cast<int>(t.factors.size()) != n) return false;
    ProductTerm c = t;
    for (auto& f : c.factors) {
      const double norm = f.norm();
      if (!(norm > 0.0)) return false;
      f /= norm;
    }
    normed.push_back(std::move(c));
  }
  for (std::size_t a = 0; a < normed.size(); ++a)
    for (std::size_t b = a + 1; b < normed.size(); ++b)
      for (int p = 0; p < n; ++p)
        if (normed[a].factors[p].size() != normed[b].factors[p].size()) return false;
  for (int q = 0; q < n; ++q)
    for (std::size_t a = 0; a < normed.size(); ++a)
      for (std::size_t b = a + 1; b < normed.size(); ++b) {
        cplx overlap = 1.0;
        for (int p = 0; p < n; ++p)
          if (p != q) overlap *= normed[a].factors[p].dot(normed[b].factors[p]);
        if (std::abs(overlap) > kOpbTol) return false;
      }
  return true;
}

SQESolution solve_opb(const HermitianOperator& op, const Partition& partition,
                      std::vector<ProductTerm> terms, int r) {
  require(partition.subsystem_count() == op.shape().size(), ErrorKind::kInvalidShape,
          "partition does not cover the operator's subsystems");
  require(r >= 1, ErrorKind::kInvalidArgument, "rank r must be at least 1");
  require(!terms.empty(), ErrorKind::kStructureNotApplicable, "empty product decomposition");
  if (!detect_opb(terms, partition))
    fail(ErrorKind::kStructureNotApplicable, "terms are not an orthonormal product basis");
  const auto problem = detail::make_problem(op, partition);
  for (const auto& t : terms)
    for (int p = 0; p < partition.party_count(); ++p)
      require(t.factors[p].size() == problem.dims[p], ErrorKind::kInvalidShape,
              "product factor does not match its party dimension");
  terms = normalized_terms(std::move(terms));
  std::stable_sort(terms.begin(), terms.end(), [](const ProductTerm& a, const ProductTerm& b) {
    return std::abs(a.coefficient) > std::abs(b.coefficient);
  });
  Vector psi = Vector::Zero(problem.total());
  for (const auto& t : terms) psi += t.coefficient * kron_all(t.factors);
  const double scale = std::max(1.0, problem.op.cwiseAbs().maxCoeff());
  if ((problem.op - psi * psi.adjoint()).cwiseAbs().maxCoeff() > kOpbTol * scale)
    fail(ErrorKind::kStructureNotApplicable, "terms do not reproduce the operator");
  auto c = detail::opb_candidate(terms, problem.dims, r);
  c.exact = true;
  return detail::to_solution(problem, partition, r, std::move(c));
}

std::vector<std::vector<ProductTerm>> find_opb_decompositions(const PureState& psi,
                                                              const Partition& partition) {
  require(partition.subsystem_count() == psi.shape().size(), ErrorKind::kInvalidShape,
          "partition does not cover the state's subsystems");
  const PartyLayout layout(psi.shape(), partition);
  return detail::opb_search(layout.to_party_order(psi.amplitudes()), layout.party_dims(),
                            layout.party_local_dims());
}

SQESolution solve_partially_separable(const HermitianOperator& op, const Partition& partition,
                                      int r, const SolverOptions& options) {
  require(partition.subsystem_count() == op.shape().size(), ErrorKind::kInvalidShape,
          "partition does not cover the operator's subsystems");
  require(r >= 1, ErrorKind::kInvalidArgument, "rank r must be at least 1");
  const auto problem = detail::make_problem(op, partition);
  std::optional<detail::Candidate> best = detail::block_candidate(problem, r, options);
  if (auto psi = detail::rank_one_vector(problem.op)) {
    auto c = detail::purification_candidate(*psi, problem, r, options);
    if (c) {
      c->exact = std::abs(c->g - detail::upper_bound_rank_one(*psi, problem.dims, r)) <= 1e-10;
      if (!best || c->g > best->g) best = std::move(c);
    }
  }
  if (!best)
    fail(ErrorKind::kStructureNotApplicable,
         "operator is not block diagonal in a basis of any party");
  return detail::to_solution(problem, partition, r, std::move(*best));
}

HermitianOperator reduced_operator(const HermitianOperator& op, const Partition& partition,
                                   int party) {
  require(partition.subsystem_count() == op.shape().size(), ErrorKind::kInvalidShape,
          "partition does not cover the operator's subsystems");
  require(party >= 0 && party < partition.party_count(), ErrorKind::kInvalidIndex,
          "party index out of range");
  require(partition.party_count() >= 2, ErrorKind::kInvalidArgument,
          "cannot trace out the only party");
  std::vector<int> keep;
  for (int s = 0; s < op.shape().size(); ++s)
    if (partition.party_of(s) != party) keep.push_back(s);
  return partial_trace(op, keep);
}

double cascade_r1_bound(const HermitianOperator& op, const Partition& partition, int party,
                        const SolverOptions& options) {
  require(op.is_psd(), ErrorKind::kInvalidArgument, "cascade bound needs a positive operator");
  if (partition.party_count() == 1) return op.trace();
  const auto reduced = reduced_operator(op, partition, party);
  std::vector<int> kept;
  for (int s = 0; s < op.shape().size(); ++s)
    if (partition.party_of(s) != party) kept.push_back(s);
  std::vector<std::vector<int>> blocks;
  for (int q = 0; q < partition.party_count(); ++q) {
    if (q == party) continue;
    std::vector<int> block;
    for (int s : partition.block(q))
      block.push_back(static_cast<int>(std::lower_bound(kept.begin(), kept.end(), s) - kept.begin()));
    blocks.push_back(std::move(block));
  }
  const Partition sub(blocks, static_cast<int>(kept.size()));
  return g_r_max(reduced, sub, 1, options).g;
}

double rank_one_upper_bound(const PureState& psi, const Partition& partition, int r) {
  require(partition.subsystem_count() == psi.shape().size(), ErrorKind::kInvalidShape,
          "partition does not cover the state's subsystems");
  require(r >= 1, ErrorKind::kInvalidArgument, "rank r must be at least 1");
  const PartyLayout layout(psi.shape(), partition);
  return detail::upper_bound_rank_one(layout.to_party_order(psi.amplitudes()),
                                      layout.party_dims(), r);
}

}  // namespace sqe
