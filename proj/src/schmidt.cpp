#include "sqe/schmidt.hpp"

#include <algorithm>

#include "sqe/error.hpp"

namespace sqe {

SchmidtDecomposition schmidt_of_matrix(const Vector& v, Index rows, Index cols) {
  require(v.size() == rows * cols, ErrorKind::kInvalidShape, "reshape size mismatch");
  using RowMajor = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Matrix m = Eigen::Map<const RowMajor>(v.data(), rows, cols);
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  SchmidtDecomposition out;
  const auto& s = svd.singularValues();
  for (Index k = 0; k < s.size(); ++k) {
    out.coefficients.push_back(s(k));
    out.left_vectors.push_back(svd.matrixU().col(k));
    out.right_vectors.push_back(svd.matrixV().col(k).conjugate());
    if (s(k) > kSchmidtRankTol) ++out.rank;
  }
  return out;
}

SchmidtDecomposition bipartite_schmidt(const PureState& state, const Partition& partition) {
  require(partition.party_count() == 2, ErrorKind::kInvalidArgument,
          "bipartite Schmidt decomposition needs a 2-block partition");
  require(state.is_normalized(1e-10), ErrorKind::kInvalidArgument, "state is not normalized");
  const PartyLayout layout(state.shape(), partition);
  const auto& d = layout.party_dims();
  return schmidt_of_matrix(layout.to_party_order(state.amplitudes()), d[0], d[1]);
}

double g_r_bipartite(const PureState& state, const Partition& partition, int r) {
  require(r >= 1, ErrorKind::kInvalidArgument, "rank must be at least 1");
  const auto sd = bipartite_schmidt(state, partition);
  if (r >= sd.rank) return 1.0;
  double g = 0.0;
  for (int k = 0; k < r; ++k) g += sd.coefficients[k] * sd.coefficients[k];
  return g;
}

int msn_lower_bound(const PureState& state, const Partition& partition) {
  int best = 1;
  for (const auto& cut : two_block_coarsenings(partition))
    best = std::max(best, bipartite_schmidt(state, cut).rank);
  return best;
}

}  // namespace sqe
