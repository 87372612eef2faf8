#pragma once

#include <vector>

#include "sqe/partitions.hpp"
#include "sqe/tensor.hpp"

namespace sqe {

inline constexpr double kSchmidtRankTol = 1e-9;

/// psi = sum_k coefficients[k] |left[k]> |right[k]>, coefficients descending.
/// Left vectors live on the first block of the 2-block partition, right
/// vectors on the second (each block in row-major order of its subsystems).
struct SchmidtDecomposition {
  std::vector<double> coefficients;
  std::vector<Vector> left_vectors;
  std::vector<Vector> right_vectors;
  int rank = 0;
};

/// Singular-value form of a vector reshaped as rows x cols (row-major).
SchmidtDecomposition schmidt_of_matrix(const Vector& v, Index rows, Index cols);

SchmidtDecomposition bipartite_schmidt(const PureState& state, const Partition& partition);

/// Sum of the r largest squared Schmidt coefficients.
double g_r_bipartite(const PureState& state, const Partition& partition, int r);

/// Largest bipartite Schmidt rank over the 2-block coarsenings of
/// `partition`. A lower bound on the multipartite Schmidt rank only.
int msn_lower_bound(const PureState& state, const Partition& partition);

}  // namespace sqe
