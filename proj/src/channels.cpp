#include "sqe/channels.hpp"

#include <cmath>

#include "sqe/error.hpp"

namespace sqe {

namespace {

constexpr double kTraceDefectTol = 1e-12;

void check_sigma(double sigma_sq) {
  require(std::isfinite(sigma_sq) && sigma_sq >= 0.0, ErrorKind::kInvalidArgument,
          "dephasing variance must be finite and nonnegative");
}

double weight_sum(const std::vector<double>& lambdas) {
  double s = 0.0;
  for (double l : lambdas) s += l * l;
  return s;
}

}  // namespace

KrausChannel::KrausChannel(int target, std::vector<Matrix> operators)
    : target_(target), operators_(std::move(operators)) {
  require(target_ >= 0, ErrorKind::kInvalidIndex, "negative channel target");
  require(!operators_.empty(), ErrorKind::kInvalidArgument, "channel without Kraus operators");
  const Index d = operators_.front().cols();
  for (const auto& e : operators_)
    require(e.rows() == d && e.cols() == d, ErrorKind::kInvalidShape,
            "Kraus operators must be square and of equal size");
  require(trace_preservation_defect() <= kTraceDefectTol, ErrorKind::kInvalidArgument,
          "Kraus operators are not trace preserving");
}

double KrausChannel::trace_preservation_defect() const {
  const Index d = operators_.front().cols();
  Matrix sum = Matrix::Zero(d, d);
  for (const auto& e : operators_) sum += e.adjoint() * e;
  return (sum - Matrix::Identity(d, d)).cwiseAbs().maxCoeff();
}

DensityOperator KrausChannel::apply(const DensityOperator& rho) const {
  const SystemShape& shape = rho.shape();
  require(target_ < shape.size(), ErrorKind::kInvalidIndex, "channel target out of range");
  require(shape.dim(target_) == operators_.front().rows(), ErrorKind::kInvalidShape,
          "Kraus operators do not match the target dimension");
  Matrix out = Matrix::Zero(shape.total_dim(), shape.total_dim());
  for (const auto& e : operators_) {
    const Matrix full = embed_local(e, shape, target_);
    out += full * rho.matrix() * full.adjoint();
  }
  out = 0.5 * (out + out.adjoint()).eval();
  return DensityOperator(shape, std::move(out));
}

DensityOperator white_noise(const DensityOperator& rho, double mu) {
  require(std::isfinite(mu) && mu >= 0.0 && mu <= 1.0, ErrorKind::kInvalidArgument,
          "white-noise fraction must lie in [0, 1]");
  const Index d = rho.shape().total_dim();
  Matrix out = (1.0 - mu) * rho.matrix();
  out.diagonal().array() += mu / static_cast<double>(d);
  return DensityOperator(rho.shape(), std::move(out));
}

KrausChannel amplitude_loss_channel(int subsystem, double t) {
  require(std::isfinite(t) && t >= 0.0 && t <= 1.0, ErrorKind::kInvalidArgument,
          "transmission must lie in [0, 1]");
  Matrix e0 = Matrix::Zero(2, 2), e1 = Matrix::Zero(2, 2);
  e0(0, 0) = 1.0;
  e0(1, 1) = t;
  e1(0, 1) = std::sqrt(1.0 - t * t);
  return KrausChannel(subsystem, {e0, e1});
}

DensityOperator amplitude_loss(const DensityOperator& rho, int subsystem, double t) {
  require(subsystem >= 0 && subsystem < rho.shape().size(), ErrorKind::kInvalidIndex,
          "loss target out of range");
  require(rho.shape().dim(subsystem) == 2, ErrorKind::kInvalidArgument,
          "loss channel acts on qubits only");
  return amplitude_loss_channel(subsystem, t).apply(rho);
}

DephasingSpec::DephasingSpec(double sigma_sq_total) : sigma_sq_total(sigma_sq_total) {
  check_sigma(sigma_sq_total);
}

DephasingSpec DephasingSpec::from_local(const std::vector<double>& sigma_sq) {
  double total = 0.0;
  for (double s : sigma_sq) {
    check_sigma(s);
    total += s;
  }
  return DephasingSpec(total);
}

Matrix fock_dephase(const Matrix& coefficients, const DephasingSpec& spec) {
  require(coefficients.rows() == coefficients.cols(), ErrorKind::kInvalidShape,
          "coefficient matrix must be square");
  Matrix out = coefficients;
  for (Index i = 0; i < out.rows(); ++i)
    for (Index j = 0; j < out.cols(); ++j) {
      const double k = static_cast<double>(i - j);
      out(i, j) *= std::exp(-spec.sigma_sq_total * k * k / 2.0);
    }
  return out;
}

DensityOperator local_phase_diffusion(const DensityOperator& rho, int subsystem,
                                      double sigma_sq) {
  check_sigma(sigma_sq);
  const SystemShape& shape = rho.shape();
  require(subsystem >= 0 && subsystem < shape.size(), ErrorKind::kInvalidIndex,
          "dephasing target out of range");
  const Index d = shape.dim(subsystem);
  Index after = 1;
  for (int s = subsystem + 1; s < shape.size(); ++s) after *= shape.dim(s);
  Matrix out = rho.matrix();
  for (Index a = 0; a < out.rows(); ++a)
    for (Index b = 0; b < out.cols(); ++b) {
      const double k = static_cast<double>((a / after) % d) - static_cast<double>((b / after) % d);
      out(a, b) *= std::exp(-sigma_sq * k * k / 2.0);
    }
  return DensityOperator(shape, std::move(out));
}

std::vector<double> geometric_lambdas(int d) {
  require(d >= 1, ErrorKind::kInvalidArgument, "truncation must be at least 1");
  std::vector<double> out(d);
  for (int i = 0; i < d; ++i) out[i] = std::pow(2.0, -(1.0 + i) / 2.0);
  return out;
}

double ghz_level(const std::vector<double>& lambdas, int r) {
  require(r >= 1, ErrorKind::kInvalidArgument, "rank r must be at least 1");
  double g = 0.0;
  for (int i = 0; i < r && i < static_cast<int>(lambdas.size()); ++i)
    g += lambdas[i] * lambdas[i];
  return g;
}

Matrix ghz_coefficients(const std::vector<double>& lambdas) {
  const Index d = static_cast<Index>(lambdas.size());
  Vector v(d);
  for (Index i = 0; i < d; ++i) v(i) = lambdas[i];
  return v * v.adjoint();
}

double ghz_expectation(const Matrix& coefficients, const std::vector<double>& lambdas) {
  const Index d = static_cast<Index>(lambdas.size());
  require(coefficients.rows() == d && coefficients.cols() == d, ErrorKind::kInvalidShape,
          "coefficients do not match the truncation");
  const double norm = weight_sum(lambdas);
  require(norm > 0.0, ErrorKind::kInvalidArgument, "all coefficients vanish");
  Vector v(d);
  for (Index i = 0; i < d; ++i) v(i) = lambdas[i];
  return v.dot(coefficients * v).real() / norm;
}

GhzValue ghz_witness_value(const std::vector<double>& lambdas, double sigma_sq_total,
                           bool renormalize) {
  require(!lambdas.empty(), ErrorKind::kInvalidArgument, "no coefficients given");
  check_sigma(sigma_sq_total);
  GhzValue out;
  out.truncation = static_cast<int>(lambdas.size());
  out.norm = weight_sum(lambdas);
  require(out.norm > 0.0, ErrorKind::kInvalidArgument, "all coefficients vanish");
  if (!renormalize)
    require(std::abs(out.norm - 1.0) <= 1e-12, ErrorKind::kInvalidArgument,
            "coefficients are not normalized; request renormalization explicitly");
  const double scale = renormalize ? 1.0 / out.norm : 1.0;
  const int d = out.truncation;
  std::vector<double> w(d);
  for (int i = 0; i < d; ++i) w[i] = lambdas[i] * lambdas[i] * scale;
  // (sum_i w_i)^2 - sum_{k>0} 2 (1 - exp(-s k^2 / 2)) sum_i w_i w_{i+k}, smallest terms first.
  double deficit = 0.0;
  for (int k = d - 1; k >= 1; --k) {
    double band = 0.0;
    for (int i = 0; i + k < d; ++i) band += w[i] * w[i + k];
    deficit -= 2.0 * std::expm1(-sigma_sq_total * k * static_cast<double>(k) / 2.0) * band;
  }
  const double total = renormalize ? 1.0 : out.norm * out.norm;
  out.value = total - deficit;
  out.tail_bound = 2.0 * std::max(0.0, 1.0 - out.norm);
  return out;
}

PureState ghz_state(const std::vector<double>& lambdas, int modes) {
  require(modes >= 1, ErrorKind::kInvalidArgument, "need at least one mode");
  const int d = static_cast<int>(lambdas.size());
  require(d >= 1, ErrorKind::kInvalidArgument, "no coefficients given");
  const SystemShape shape(std::vector<int>(modes, d));
  Vector amps = Vector::Zero(shape.total_dim());
  for (int i = 0; i < d; ++i) amps(shape.ravel(std::vector<int>(modes, i))) = lambdas[i];
  return PureState(shape, amps.normalized());
}

}  // namespace sqe
