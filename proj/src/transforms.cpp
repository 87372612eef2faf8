#include <cmath>

#include "solver_detail.hpp"
#include "sqe/error.hpp"

namespace sqe {

namespace {

constexpr double kUnitaryTol = 1e-10;

void check_unitaries(std::span<const Matrix> unitaries, const std::vector<Index>& dims) {
  require(unitaries.size() == dims.size(), ErrorKind::kInvalidArgument,
          "need exactly one unitary per party");
  for (std::size_t q = 0; q < dims.size(); ++q) {
    const Matrix& u = unitaries[q];
    require(u.rows() == dims[q] && u.cols() == dims[q], ErrorKind::kInvalidShape,
            "unitary does not match its party dimension");
    const Matrix defect = u.adjoint() * u - Matrix::Identity(dims[q], dims[q]);
    require(defect.cwiseAbs().maxCoeff() <= kUnitaryTol, ErrorKind::kInvalidArgument,
            "local transformation is not unitary");
  }
}

}  // namespace

HermitianOperator local_transform(const HermitianOperator& op, const Partition& partition,
                                  std::span<const Matrix> unitaries, double xi1, double xi2) {
  const PartyLayout layout(op.shape(), partition);
  check_unitaries(unitaries, layout.party_dims());
  require(std::isfinite(xi1) && std::isfinite(xi2) && xi2 != 0.0, ErrorKind::kInvalidArgument,
          "xi1 must be finite and xi2 finite and nonzero");
  const Matrix u = kron_all(unitaries);
  const Index dim = op.shape().total_dim();
  Matrix shifted = xi2 * layout.to_party_order(op.matrix());
  shifted += xi1 * Matrix::Identity(dim, dim);
  Matrix out = u * shifted * u.adjoint();
  out = 0.5 * (out + out.adjoint()).eval();
  return HermitianOperator(op.shape(), layout.from_party_order(out));
}

SQESolution transform_solution(const SQESolution& solution, std::span<const Matrix> unitaries,
                               double xi1, double xi2) {
  std::vector<Index> dims;
  for (const auto& vs : solution.spinor.party_vectors) {
    require(!vs.empty(), ErrorKind::kInvalidShape, "spinor party without vectors");
    dims.push_back(vs.front().size());
  }
  check_unitaries(unitaries, dims);
  require(xi2 != 0.0, ErrorKind::kInvalidArgument, "xi2 must be nonzero");
  SQESolution out = solution;
  out.g = xi1 + xi2 * solution.g;
  for (std::size_t q = 0; q < dims.size(); ++q)
    for (auto& v : out.spinor.party_vectors[q]) v = unitaries[q] * v;
  out.residual_norm *= std::abs(xi2);
  out.residual_orthogonality *= std::abs(xi2);
  for (double& h : out.history) h = xi1 + xi2 * h;
  out.max_decrease = xi2 > 0.0 ? solution.max_decrease * xi2 : 0.0;
  return out;
}

SpinorSpaceCheck spinor_space_expectation_check(const HermitianOperator& op,
                                                const SpinorDecomposition& spinor) {
  const Vector phi_party = spinor.assemble_party_order();
  require(phi_party.size() == op.shape().total_dim(), ErrorKind::kInvalidShape,
          "spinor does not match the operator's dimension");
  const PartyLayout layout(op.shape(), spinor.partition);
  const int n = spinor.partition.party_count();
  const int r = spinor.rank;
  Index columns = 1;
  for (int q = 0; q < n; ++q) {
    columns *= r;
    require(columns <= kSpinorSpaceLimit, ErrorKind::kLimit, "spinor space too large");
  }
  const Index dim = op.shape().total_dim();
  require(dim <= kSpinorSpaceLimit / columns, ErrorKind::kLimit, "spinor space too large");

  Matrix x(dim, columns);
  std::vector<Vector> factors(n);
  for (Index c = 0; c < columns; ++c) {
    Index code = c;
    for (int q = n - 1; q >= 0; --q) {
      factors[q] = spinor.party_vectors[q][code % r];
      code /= r;
    }
    x.col(c) = kron_all(factors);
  }
  Vector s = Vector::Zero(columns);
  for (int i = 0; i < r; ++i) {
    Index c = 0;
    for (int q = 0; q < n; ++q) c = c * r + i;
    s(c) = 1.0;
  }
  const Matrix l = layout.to_party_order(op.matrix());
  const Matrix lxs = (l * x) * s * s.adjoint();
  SpinorSpaceCheck out;
  out.lhs = (x.conjugate().cwiseProduct(lxs)).sum().real();
  out.rhs = phi_party.dot(l * phi_party).real();
  return out;
}

}  // namespace sqe
