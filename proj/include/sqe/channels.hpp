#pragma once

#include <vector>

#include "sqe/tensor.hpp"

namespace sqe {

/// Kraus operators acting on one subsystem.
class KrausChannel {
 public:
  /// Throws invalid_argument unless sum_k E_k^dagger E_k = I within 1e-12.
  KrausChannel(int target, std::vector<Matrix> operators);

  int target() const noexcept { return target_; }
  const std::vector<Matrix>& operators() const noexcept { return operators_; }
  double trace_preservation_defect() const;

  DensityOperator apply(const DensityOperator& rho) const;

 private:
  int target_;
  std::vector<Matrix> operators_;
};

/// mu/D I + (1 - mu) rho.
DensityOperator white_noise(const DensityOperator& rho, double mu);

/// Beam-splitter loss on a qubit: E0 = diag(1, t), E1 = sqrt(1 - t^2)|0><1|.
KrausChannel amplitude_loss_channel(int subsystem, double t);
DensityOperator amplitude_loss(const DensityOperator& rho, int subsystem, double t);

struct DephasingSpec {
  double sigma_sq_total = 0.0;

  explicit DephasingSpec(double sigma_sq_total);
  /// Sum of the per-mode variances.
  static DephasingSpec from_local(const std::vector<double>& sigma_sq);
};

/// Coefficient (i, j) of a state on span{|i, ..., i>} damped by
/// exp(-|sigma|^2 (i - j)^2 / 2).
Matrix fock_dephase(const Matrix& coefficients, const DephasingSpec& spec);

/// Random-phase diffusion of one mode with Gaussian variance sigma_sq, applied
/// to a dense density operator in the Fock basis.
DensityOperator local_phase_diffusion(const DensityOperator& rho, int subsystem, double sigma_sq);

/// lambda_i = 2^{-(1+i)/2}, i < d.
std::vector<double> geometric_lambdas(int d);

/// sum_{i<r} lambda_i^2, the g_r of the correlated state for any partition.
double ghz_level(const std::vector<double>& lambdas, int r);

/// |lambda><lambda| on the correlated subspace.
Matrix ghz_coefficients(const std::vector<double>& lambdas);

/// Tr[rho L] for L the projector on sum_i lambda_i |i,...,i> (normalized) and
/// rho given by its correlated-subspace coefficients.
double ghz_expectation(const Matrix& coefficients, const std::vector<double>& lambdas);

struct GhzValue {
  double value = 0.0;
  /// Bound on the contribution of indices >= d, assuming the untruncated
  /// coefficients are normalized.
  double tail_bound = 0.0;
  int truncation = 0;
  double norm = 0.0;  ///< sum of lambda_i^2 before any renormalization
};

/// sum_{ij} w_i w_j exp(-|sigma|^2 (i-j)^2 / 2), w_i = lambda_i^2.
/// Without `renormalize` the weights must sum to 1 within 1e-12.
GhzValue ghz_witness_value(const std::vector<double>& lambdas, double sigma_sq_total,
                           bool renormalize = false);

/// sum_i lambda_i |i>^{(x) modes}, normalized, each mode of dimension d.
PureState ghz_state(const std::vector<double>& lambdas, int modes);

}  // namespace sqe
