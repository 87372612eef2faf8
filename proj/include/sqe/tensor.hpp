#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sqe/partitions.hpp"

namespace sqe {

using cplx = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;
using Index = Eigen::Index;

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kTraceTol = 1e-12;
inline constexpr double kPsdTol = 1e-10;
inline constexpr double kImagResidueTol = 1e-10;

/// Local dimensions of an ordered list of subsystems. Flat indices are
/// row-major: subsystem 0 is the most significant digit.
class SystemShape {
 public:
  SystemShape() = default;
  explicit SystemShape(std::vector<int> dims);

  const std::vector<int>& dims() const noexcept { return dims_; }
  int dim(int subsystem) const { return dims_.at(subsystem); }
  int size() const noexcept { return static_cast<int>(dims_.size()); }
  Index total_dim() const noexcept { return total_; }

  SystemShape subset(std::span<const int> subsystems) const;
  SystemShape permuted(std::span<const int> perm) const;
  /// Dimension of each party's space under `p`.
  std::vector<Index> party_dims(const Partition& p) const;

  std::vector<int> unravel(Index flat) const;
  Index ravel(std::span<const int> digits) const;

  friend bool operator==(const SystemShape&, const SystemShape&) = default;

 private:
  std::vector<int> dims_;
  Index total_ = 1;
};

/// Dense amplitude vector over a SystemShape. Normalization is not enforced
/// on construction; operations that need it check `is_normalized`.
class PureState {
 public:
  PureState() = default;
  PureState(SystemShape shape, Vector amplitudes);

  const SystemShape& shape() const noexcept { return shape_; }
  const Vector& amplitudes() const noexcept { return amplitudes_; }
  double norm() const { return amplitudes_.norm(); }
  bool is_normalized(double tol = 1e-12) const;
  PureState normalized() const;

 private:
  SystemShape shape_;
  Vector amplitudes_;
};

class HermitianOperator {
 public:
  HermitianOperator() = default;
  /// Throws unless `matrix` is square, matches `shape`, and is Hermitian to
  /// 1e-12 (relative to its largest entry, floor 1).
  HermitianOperator(SystemShape shape, Matrix matrix);

  static HermitianOperator identity(const SystemShape& shape);
  static HermitianOperator projector(const PureState& state);

  const SystemShape& shape() const noexcept { return shape_; }
  const Matrix& matrix() const noexcept { return matrix_; }
  double trace() const { return matrix_.trace().real(); }
  bool is_psd(double tol = kPsdTol) const;

 private:
  SystemShape shape_;
  Matrix matrix_;
};

class DensityOperator {
 public:
  DensityOperator() = default;
  /// Throws unless Hermitian (1e-12), unit trace (1e-12) and PSD (-1e-10).
  DensityOperator(SystemShape shape, Matrix matrix);

  static DensityOperator from_pure(const PureState& state);
  static DensityOperator maximally_mixed(const SystemShape& shape);

  const SystemShape& shape() const noexcept { return shape_; }
  const Matrix& matrix() const noexcept { return matrix_; }

 private:
  SystemShape shape_;
  Matrix matrix_;
};

Vector basis_vector(Index dim, Index k);
Vector kron(const Vector& a, const Vector& b);
Matrix kron(const Matrix& a, const Matrix& b);
Vector kron_all(std::span<const Vector> factors);
Matrix kron_all(std::span<const Matrix> factors);

/// Places `local` on `subsystem` with identities elsewhere.
Matrix embed_local(const Matrix& local, const SystemShape& shape, int subsystem);

PureState product_state(std::span<const PureState> parts);

/// Result subsystem k is input subsystem perm[k].
Vector permute_subsystems(const Vector& v, const SystemShape& shape, std::span<const int> perm);
Matrix permute_subsystems(const Matrix& m, const SystemShape& shape, std::span<const int> perm);
PureState permute_subsystems(const PureState& s, std::span<const int> perm);
HermitianOperator permute_subsystems(const HermitianOperator& op, std::span<const int> perm);
DensityOperator permute_subsystems(const DensityOperator& rho, std::span<const int> perm);
std::vector<int> inverse_permutation(std::span<const int> perm);

/// Traces out every subsystem not in `keep`. The kept subsystems retain
/// their original relative order.
Matrix partial_trace(const Matrix& m, const SystemShape& shape, std::span<const int> keep);
HermitianOperator partial_trace(const HermitianOperator& op, std::span<const int> keep);
DensityOperator partial_trace(const DensityOperator& rho, std::span<const int> keep);

/// Contracts `op` with product vectors on every party except `party`.
/// `bra_parts`/`ket_parts` hold one vector per party other than `party`,
/// in party order. The result acts on the block space of `party`.
Matrix partial_inner(std::span<const Vector> bra_parts, const HermitianOperator& op,
                     std::span<const Vector> ket_parts, const Partition& partition, int party);

double expectation(const HermitianOperator& op, const DensityOperator& rho);
double expectation(const HermitianOperator& op, const PureState& state);

/// Maps between the original subsystem ordering and the ordering in which
/// subsystems are grouped party by party (each party's block space being the
/// row-major product of its sorted subsystems).
class PartyLayout {
 public:
  PartyLayout(const SystemShape& shape, const Partition& partition);

  const SystemShape& shape() const noexcept { return shape_; }
  const Partition& partition() const noexcept { return partition_; }
  const std::vector<Index>& party_dims() const noexcept { return party_dims_; }
  /// Local dims of each subsystem inside each party block.
  std::vector<std::vector<int>> party_local_dims() const;

  Vector to_party_order(const Vector& v) const;
  Vector from_party_order(const Vector& v) const;
  Matrix to_party_order(const Matrix& m) const;
  Matrix from_party_order(const Matrix& m) const;

 private:
  SystemShape shape_;
  Partition partition_;
  std::vector<int> order_;
  std::vector<Index> party_dims_;
};

}  // namespace sqe
