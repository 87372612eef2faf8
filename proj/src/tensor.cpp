#include "sqe/tensor.hpp"

#include <algorithm>
#include <numeric>

#include "sqe/error.hpp"

namespace sqe {

namespace {

double hermiticity_gap(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.adjoint()).cwiseAbs().maxCoeff() / scale;
}

std::vector<Index> strides_of(const std::vector<int>& dims) {
  std::vector<Index> s(dims.size(), 1);
  for (int k = static_cast<int>(dims.size()) - 2; k >= 0; --k) s[k] = s[k + 1] * dims[k + 1];
  return s;
}

void check_permutation(std::span<const int> perm, int n) {
  require(static_cast<int>(perm.size()) == n, ErrorKind::kInvalidArgument,
          "permutation length does not match subsystem count");
  std::vector<bool> seen(n, false);
  for (int p : perm) {
    require(p >= 0 && p < n && !seen[p], ErrorKind::kInvalidArgument,
            "permutation is not a bijection");
    seen[p] = true;
  }
}

// new flat index -> old flat index
std::vector<Index> permutation_map(const SystemShape& shape, std::span<const int> perm) {
  check_permutation(perm, shape.size());
  const auto old_strides = strides_of(shape.dims());
  const SystemShape out_shape = shape.permuted(perm);
  std::vector<Index> map(shape.total_dim());
  std::vector<int> digits(shape.size(), 0);
  for (Index j = 0; j < shape.total_dim(); ++j) {
    Index old = 0;
    for (int k = 0; k < shape.size(); ++k) old += digits[k] * old_strides[perm[k]];
    map[j] = old;
    for (int k = shape.size() - 1; k >= 0; --k) {
      if (++digits[k] < out_shape.dim(k)) break;
      digits[k] = 0;
    }
  }
  return map;
}

std::vector<int> sorted_keep(std::span<const int> keep, int n) {
  std::vector<int> k(keep.begin(), keep.end());
  std::sort(k.begin(), k.end());
  for (std::size_t i = 0; i < k.size(); ++i) {
    require(k[i] >= 0 && k[i] < n, ErrorKind::kInvalidIndex,
            "partial trace index out of range");
    require(i == 0 || k[i] != k[i - 1], ErrorKind::kInvalidIndex,
            "duplicate subsystem in partial trace");
  }
  return k;
}

// Flat-index offsets contributed by every configuration of `subsystems`.
std::vector<Index> offsets_for(const SystemShape& shape, const std::vector<int>& subsystems) {
  const auto strides = strides_of(shape.dims());
  std::vector<Index> out{0};
  for (int s : subsystems) {
    std::vector<Index> next;
    next.reserve(out.size() * shape.dim(s));
    for (Index base : out)
      for (int d = 0; d < shape.dim(s); ++d) next.push_back(base + d * strides[s]);
    out = std::move(next);
  }
  return out;
}

}  // namespace

SystemShape::SystemShape(std::vector<int> dims) : dims_(std::move(dims)) {
  require(!dims_.empty(), ErrorKind::kInvalidShape, "shape needs at least one subsystem");
  for (int d : dims_) {
    require(d >= 1, ErrorKind::kInvalidShape, "subsystem dimensions must be positive");
    total_ *= d;
  }
}

SystemShape SystemShape::subset(std::span<const int> subsystems) const {
  std::vector<int> d;
  for (int s : subsystems) {
    require(s >= 0 && s < size(), ErrorKind::kInvalidIndex, "subsystem index out of range");
    d.push_back(dims_[s]);
  }
  return SystemShape(std::move(d));
}

SystemShape SystemShape::permuted(std::span<const int> perm) const {
  check_permutation(perm, size());
  return subset(perm);
}

std::vector<Index> SystemShape::party_dims(const Partition& p) const {
  require(p.subsystem_count() == size(), ErrorKind::kInvalidShape,
          "partition does not match the system shape");
  std::vector<Index> out;
  for (const auto& b : p.blocks()) {
    Index d = 1;
    for (int s : b) d *= dims_[s];
    out.push_back(d);
  }
  return out;
}

std::vector<int> SystemShape::unravel(Index flat) const {
  std::vector<int> digits(size());
  for (int k = size() - 1; k >= 0; --k) {
    digits[k] = static_cast<int>(flat % dims_[k]);
    flat /= dims_[k];
  }
  return digits;
}

Index SystemShape::ravel(std::span<const int> digits) const {
  Index flat = 0;
  for (int k = 0; k < size(); ++k) flat = flat * dims_[k] + digits[k];
  return flat;
}

PureState::PureState(SystemShape shape, Vector amplitudes)
    : shape_(std::move(shape)), amplitudes_(std::move(amplitudes)) {
  require(amplitudes_.size() == shape_.total_dim(), ErrorKind::kInvalidShape,
          "amplitude count does not match shape");
}

bool PureState::is_normalized(double tol) const {
  return std::abs(amplitudes_.squaredNorm() - 1.0) <= tol;
}

PureState PureState::normalized() const {
  const double n = norm();
  require(n > 0.0, ErrorKind::kInvalidArgument, "cannot normalize the zero vector");
  return PureState(shape_, amplitudes_ / n);
}

HermitianOperator::HermitianOperator(SystemShape shape, Matrix matrix)
    : shape_(std::move(shape)), matrix_(std::move(matrix)) {
  require(matrix_.rows() == shape_.total_dim() && matrix_.cols() == shape_.total_dim(),
          ErrorKind::kInvalidShape, "operator size does not match shape");
  require(hermiticity_gap(matrix_) <= kHermitianTol, ErrorKind::kInvalidArgument,
          "operator is not Hermitian");
}

HermitianOperator HermitianOperator::identity(const SystemShape& shape) {
  return HermitianOperator(shape, Matrix::Identity(shape.total_dim(), shape.total_dim()));
}

HermitianOperator HermitianOperator::projector(const PureState& state) {
  const Vector& a = state.amplitudes();
  return HermitianOperator(state.shape(), a * a.adjoint());
}

bool HermitianOperator::is_psd(double tol) const {
  Eigen::SelfAdjointEigenSolver<Matrix> es(matrix_, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -tol;
}

DensityOperator::DensityOperator(SystemShape shape, Matrix matrix)
    : shape_(std::move(shape)), matrix_(std::move(matrix)) {
  require(matrix_.rows() == shape_.total_dim() && matrix_.cols() == shape_.total_dim(),
          ErrorKind::kInvalidShape, "density matrix size does not match shape");
  require(hermiticity_gap(matrix_) <= kHermitianTol, ErrorKind::kInvalidArgument,
          "density matrix is not Hermitian");
  require(std::abs(matrix_.trace() - cplx(1.0)) <= kTraceTol, ErrorKind::kInvalidArgument,
          "density matrix trace is not 1");
  Eigen::SelfAdjointEigenSolver<Matrix> es(matrix_, Eigen::EigenvaluesOnly);
  require(es.eigenvalues().minCoeff() >= -kPsdTol, ErrorKind::kInvalidArgument,
          "density matrix has a negative eigenvalue");
}

DensityOperator DensityOperator::from_pure(const PureState& state) {
  require(state.is_normalized(), ErrorKind::kInvalidArgument, "state is not normalized");
  const Vector& a = state.amplitudes();
  return DensityOperator(state.shape(), a * a.adjoint());
}

DensityOperator DensityOperator::maximally_mixed(const SystemShape& shape) {
  const Index d = shape.total_dim();
  return DensityOperator(shape, Matrix::Identity(d, d) / static_cast<double>(d));
}

Vector basis_vector(Index dim, Index k) {
  require(k >= 0 && k < dim, ErrorKind::kInvalidIndex, "basis index out of range");
  Vector v = Vector::Zero(dim);
  v(k) = 1.0;
  return v;
}

Vector kron(const Vector& a, const Vector& b) {
  Vector out(a.size() * b.size());
  for (Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Vector kron_all(std::span<const Vector> factors) {
  Vector out = Vector::Ones(1);
  for (const auto& f : factors) out = kron(out, f);
  return out;
}

Matrix kron_all(std::span<const Matrix> factors) {
  Matrix out = Matrix::Ones(1, 1);
  for (const auto& f : factors) out = kron(out, f);
  return out;
}

Matrix embed_local(const Matrix& local, const SystemShape& shape, int subsystem) {
  require(subsystem >= 0 && subsystem < shape.size(), ErrorKind::kInvalidIndex,
          "subsystem index out of range");
  require(local.rows() == shape.dim(subsystem) && local.cols() == shape.dim(subsystem),
          ErrorKind::kInvalidShape, "local operator does not match subsystem dimension");
  Index before = 1, after = 1;
  for (int k = 0; k < subsystem; ++k) before *= shape.dim(k);
  for (int k = subsystem + 1; k < shape.size(); ++k) after *= shape.dim(k);
  return kron(kron(Matrix::Identity(before, before), local), Matrix::Identity(after, after));
}

PureState product_state(std::span<const PureState> parts) {
  require(!parts.empty(), ErrorKind::kInvalidShape, "product of zero parts");
  std::vector<int> dims;
  Vector amps = Vector::Ones(1);
  for (const auto& p : parts) {
    require(p.shape().total_dim() > 0, ErrorKind::kInvalidShape, "dimension-zero part");
    dims.insert(dims.end(), p.shape().dims().begin(), p.shape().dims().end());
    amps = kron(amps, p.amplitudes());
  }
  return PureState(SystemShape(std::move(dims)), std::move(amps));
}

std::vector<int> inverse_permutation(std::span<const int> perm) {
  check_permutation(perm, static_cast<int>(perm.size()));
  std::vector<int> inv(perm.size());
  for (std::size_t k = 0; k < perm.size(); ++k) inv[perm[k]] = static_cast<int>(k);
  return inv;
}

Vector permute_subsystems(const Vector& v, const SystemShape& shape, std::span<const int> perm) {
  require(v.size() == shape.total_dim(), ErrorKind::kInvalidShape, "vector does not match shape");
  const auto map = permutation_map(shape, perm);
  Vector out(v.size());
  for (Index j = 0; j < v.size(); ++j) out(j) = v(map[j]);
  return out;
}

Matrix permute_subsystems(const Matrix& m, const SystemShape& shape, std::span<const int> perm) {
  require(m.rows() == shape.total_dim() && m.cols() == shape.total_dim(),
          ErrorKind::kInvalidShape, "matrix does not match shape");
  const auto map = permutation_map(shape, perm);
  Matrix out(m.rows(), m.cols());
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i) out(i, j) = m(map[i], map[j]);
  return out;
}

PureState permute_subsystems(const PureState& s, std::span<const int> perm) {
  return PureState(s.shape().permuted(perm), permute_subsystems(s.amplitudes(), s.shape(), perm));
}

HermitianOperator permute_subsystems(const HermitianOperator& op, std::span<const int> perm) {
  return HermitianOperator(op.shape().permuted(perm),
                           permute_subsystems(op.matrix(), op.shape(), perm));
}

DensityOperator permute_subsystems(const DensityOperator& rho, std::span<const int> perm) {
  return DensityOperator(rho.shape().permuted(perm),
                         permute_subsystems(rho.matrix(), rho.shape(), perm));
}

Matrix partial_trace(const Matrix& m, const SystemShape& shape, std::span<const int> keep) {
  require(m.rows() == shape.total_dim() && m.cols() == shape.total_dim(),
          ErrorKind::kInvalidShape, "matrix does not match shape");
  const auto kept = sorted_keep(keep, shape.size());
  std::vector<int> traced;
  for (int s = 0; s < shape.size(); ++s)
    if (!std::binary_search(kept.begin(), kept.end(), s)) traced.push_back(s);

  const auto keep_off = offsets_for(shape, kept);
  const auto trace_off = offsets_for(shape, traced);
  const Index dk = static_cast<Index>(keep_off.size());
  Matrix out = Matrix::Zero(dk, dk);
  for (Index j = 0; j < dk; ++j)
    for (Index i = 0; i < dk; ++i) {
      cplx acc = 0.0;
      for (Index t : trace_off) acc += m(keep_off[i] + t, keep_off[j] + t);
      out(i, j) = acc;
    }
  return out;
}

HermitianOperator partial_trace(const HermitianOperator& op, std::span<const int> keep) {
  const auto kept = sorted_keep(keep, op.shape().size());
  require(!kept.empty(), ErrorKind::kInvalidIndex, "partial trace must keep a subsystem");
  Matrix r = partial_trace(op.matrix(), op.shape(), kept);
  r = 0.5 * (r + r.adjoint()).eval();
  return HermitianOperator(op.shape().subset(kept), std::move(r));
}

DensityOperator partial_trace(const DensityOperator& rho, std::span<const int> keep) {
  const auto kept = sorted_keep(keep, rho.shape().size());
  require(!kept.empty(), ErrorKind::kInvalidIndex, "partial trace must keep a subsystem");
  Matrix r = partial_trace(rho.matrix(), rho.shape(), kept);
  r = 0.5 * (r + r.adjoint()).eval();
  return DensityOperator(rho.shape().subset(kept), std::move(r));
}

Matrix partial_inner(std::span<const Vector> bra_parts, const HermitianOperator& op,
                     std::span<const Vector> ket_parts, const Partition& partition, int party) {
  const PartyLayout layout(op.shape(), partition);
  const auto& dims = layout.party_dims();
  const int n = partition.party_count();
  require(party >= 0 && party < n, ErrorKind::kInvalidIndex, "party index out of range");
  require(static_cast<int>(bra_parts.size()) == n - 1 &&
              static_cast<int>(ket_parts.size()) == n - 1,
          ErrorKind::kInvalidShape, "need one vector per party other than the open one");
  auto column_block = [&](std::span<const Vector> parts) {
    const Index dq = dims[party];
    Matrix cols(op.shape().total_dim(), dq);
    for (Index x = 0; x < dq; ++x) {
      Vector v = Vector::Ones(1);
      int k = 0;
      for (int p = 0; p < n; ++p) {
        if (p == party) {
          v = kron(v, basis_vector(dq, x));
        } else {
          require(parts[k].size() == dims[p], ErrorKind::kInvalidShape,
                  "party vector dimension does not match its block");
          v = kron(v, parts[k++]);
        }
      }
      cols.col(x) = v;
    }
    return cols;
  };
  const Matrix bra = column_block(bra_parts);
  const Matrix ket = column_block(ket_parts);
  return bra.adjoint() * layout.to_party_order(op.matrix()) * ket;
}

double expectation(const HermitianOperator& op, const DensityOperator& rho) {
  require(op.shape() == rho.shape(), ErrorKind::kInvalidShape,
          "operator and state shapes differ");
  const cplx value = rho.matrix().cwiseProduct(op.matrix().transpose()).sum();
  require(std::abs(value.imag()) <= kImagResidueTol, ErrorKind::kNumericalInconsistency,
          "expectation value has an imaginary residue");
  return value.real();
}

double expectation(const HermitianOperator& op, const PureState& state) {
  require(op.shape() == state.shape(), ErrorKind::kInvalidShape,
          "operator and state shapes differ");
  const cplx value = state.amplitudes().dot(op.matrix() * state.amplitudes());
  require(std::abs(value.imag()) <= kImagResidueTol, ErrorKind::kNumericalInconsistency,
          "expectation value has an imaginary residue");
  return value.real();
}

PartyLayout::PartyLayout(const SystemShape& shape, const Partition& partition)
    : shape_(shape),
      partition_(partition),
      order_(partition.party_order()),
      party_dims_(shape.party_dims(partition)) {}

std::vector<std::vector<int>> PartyLayout::party_local_dims() const {
  std::vector<std::vector<int>> out;
  for (const auto& b : partition_.blocks()) {
    std::vector<int> d;
    for (int s : b) d.push_back(shape_.dim(s));
    out.push_back(std::move(d));
  }
  return out;
}

Vector PartyLayout::to_party_order(const Vector& v) const {
  return permute_subsystems(v, shape_, order_);
}

Vector PartyLayout::from_party_order(const Vector& v) const {
  const auto inv = inverse_permutation(order_);
  return permute_subsystems(v, shape_.permuted(order_), inv);
}

Matrix PartyLayout::to_party_order(const Matrix& m) const {
  return permute_subsystems(m, shape_, order_);
}

Matrix PartyLayout::from_party_order(const Matrix& m) const {
  const auto inv = inverse_permutation(order_);
  return permute_subsystems(m, shape_.permuted(order_), inv);
}

}  // namespace sqe
