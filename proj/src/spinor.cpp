#include <numeric>

#include "solver_detail.hpp"
#include "sqe/error.hpp"

namespace sqe {

namespace detail {

namespace {

std::vector<int> to_int_dims(const std::vector<Index>& dims) {
  return std::vector<int>(dims.begin(), dims.end());
}

void split_dims(const std::vector<Index>& dims, int party, Index& before, Index& after) {
  before = 1;
  after = 1;
  for (int p = 0; p < party; ++p) before *= dims[p];
  for (std::size_t p = party + 1; p < dims.size(); ++p) after *= dims[p];
}

}  // namespace

Problem make_problem(const HermitianOperator& op, const Partition& partition) {
  const PartyLayout layout(op.shape(), partition);
  return Problem{layout.to_party_order(op.matrix()), layout.party_dims(),
                 layout.party_local_dims()};
}

Problem sub_problem(Matrix op, const Problem& parent, const std::vector<int>& kept_parties) {
  Problem out;
  out.op = std::move(op);
  for (int p : kept_parties) {
    out.dims.push_back(parent.dims[p]);
    out.local_dims.push_back(parent.local_dims[p]);
  }
  return out;
}

Vector assemble(const Spinor& spinor, const std::vector<Index>& dims) {
  Index total = 1;
  for (Index d : dims) total *= d;
  Vector phi = Vector::Zero(total);
  if (spinor.empty()) return phi;
  const std::size_t r = spinor.front().size();
  std::vector<Vector> factors(dims.size());
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t q = 0; q < dims.size(); ++q) factors[q] = spinor[q][i];
    phi += kron_all(factors);
  }
  return phi;
}

Matrix linear_map(const Spinor& spinor, const std::vector<Index>& dims, int party) {
  const int n = static_cast<int>(dims.size());
  const int r = static_cast<int>(spinor[party].size());
  const Index dq = dims[party];
  Index before_dim, after_dim;
  split_dims(dims, party, before_dim, after_dim);
  Matrix map = Matrix::Zero(before_dim * dq * after_dim, r * dq);
  for (int i = 0; i < r; ++i) {
    Vector before = Vector::Ones(1), after = Vector::Ones(1);
    for (int p = 0; p < party; ++p) before = kron(before, spinor[p][i]);
    for (int p = party + 1; p < n; ++p) after = kron(after, spinor[p][i]);
    for (Index b = 0; b < before_dim; ++b) {
      if (before(b) == cplx(0.0)) continue;
      for (Index x = 0; x < dq; ++x) {
        const Index row0 = (b * dq + x) * after_dim;
        map.col(i * dq + x).segment(row0, after_dim) = before(b) * after;
      }
    }
  }
  return map;
}

ResidualReport residual(const Problem& problem, const Spinor& spinor, double g) {
  const Vector phi = assemble(spinor, problem.dims);
  const Vector chi = problem.op * phi - g * phi;
  ResidualReport out;
  out.residual_norm = chi.norm();
  for (int q = 0; q < problem.parties(); ++q) {
    const Vector contracted = linear_map(spinor, problem.dims, q).adjoint() * chi;
    const Index dq = problem.dims[q];
    for (Index j = 0; j * dq < contracted.size(); ++j)
      out.orthogonality_violation =
          std::max(out.orthogonality_violation, contracted.segment(j * dq, dq).norm());
  }
  return out;
}

Spinor zero_spinor(const std::vector<Index>& dims, int r) {
  Spinor s(dims.size());
  for (std::size_t q = 0; q < dims.size(); ++q) s[q].assign(r, Vector::Zero(dims[q]));
  return s;
}

Matrix party_front_matrix(const Vector& v, const std::vector<Index>& dims, int party) {
  const SystemShape shape(to_int_dims(dims));
  std::vector<int> perm{party};
  for (int p = 0; p < shape.size(); ++p)
    if (p != party) perm.push_back(p);
  const Vector moved = permute_subsystems(v, shape, perm);
  const Index rows = dims[party];
  const Index cols = moved.size() / rows;
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = moved(i * cols + j);
  return m;
}

Vector apply_local(const Vector& v, const std::vector<Index>& dims, int party, const Matrix& m) {
  Index before, after;
  split_dims(dims, party, before, after);
  const Index d = dims[party];
  Vector out = Vector::Zero(before * m.rows() * after);
  for (Index b = 0; b < before; ++b)
    for (Index a = 0; a < after; ++a) {
      Vector local(d);
      for (Index x = 0; x < d; ++x) local(x) = v((b * d + x) * after + a);
      const Vector mapped = m * local;
      for (Index y = 0; y < m.rows(); ++y) out((b * m.rows() + y) * after + a) = mapped(y);
    }
  return out;
}

Vector contract_party(const Vector& v, const std::vector<Index>& dims, int party,
                      const Vector& u) {
  const Matrix bra = u.adjoint();
  return apply_local(v, dims, party, bra);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

Vector SpinorDecomposition::assemble_party_order() const {
  std::vector<Index> dims;
  for (const auto& vs : party_vectors) {
    require(!vs.empty(), ErrorKind::kInvalidShape, "spinor party without vectors");
    dims.push_back(vs.front().size());
  }
  return detail::assemble(party_vectors, dims);
}

PureState SpinorDecomposition::assemble(const SystemShape& shape) const {
  const PartyLayout layout(shape, partition);
  require(static_cast<int>(party_vectors.size()) == partition.party_count(),
          ErrorKind::kInvalidShape, "spinor does not have one entry per party");
  for (int q = 0; q < partition.party_count(); ++q) {
    require(static_cast<int>(party_vectors[q].size()) == rank, ErrorKind::kInvalidShape,
            "spinor party does not hold r vectors");
    for (const auto& v : party_vectors[q])
      require(v.size() == layout.party_dims()[q], ErrorKind::kInvalidShape,
              "spinor vector does not match its party dimension");
  }
  return PureState(shape, layout.from_party_order(assemble_party_order()));
}

std::string_view to_string(SolveMethod method) {
  switch (method) {
    case SolveMethod::kClosedFormOpb: return "closed_form_opb";
    case SolveMethod::kPartiallySeparable: return "partially_separable";
    case SolveMethod::kAlternating: return "alternating";
  }
  return "alternating";
}

SolveMethod solve_method_from_string(std::string_view name) {
  if (name == "closed_form_opb") return SolveMethod::kClosedFormOpb;
  if (name == "partially_separable") return SolveMethod::kPartiallySeparable;
  if (name == "alternating") return SolveMethod::kAlternating;
  fail(ErrorKind::kInvalidArgument, "unknown solve method '" + std::string(name) + "'");
}

GramOperators build_gram(const HermitianOperator& op, const SpinorDecomposition& spinor,
                         int party) {
  // assemble() validates the spinor against the operator's shape.
  (void)spinor.assemble(op.shape());
  require(party >= 0 && party < spinor.partition.party_count(), ErrorKind::kInvalidIndex,
          "party index out of range");
  const auto problem = detail::make_problem(op, spinor.partition);
  const Matrix map = detail::linear_map(spinor.party_vectors, problem.dims, party);
  GramOperators out;
  out.party = party;
  out.rank = spinor.rank;
  out.party_dim = problem.dims[party];
  out.l_bar = map.adjoint() * problem.op * map;
  out.i_bar = map.adjoint() * map;
  return out;
}

ResidualReport second_form_residual(const HermitianOperator& op,
                                    const SpinorDecomposition& spinor, double g) {
  (void)spinor.assemble(op.shape());
  return detail::residual(detail::make_problem(op, spinor.partition), spinor.party_vectors, g);
}

ResidualReport second_form_residual(const HermitianOperator& op, const SQESolution& solution) {
  return second_form_residual(op, solution.spinor, solution.g);
}

}  // namespace sqe
