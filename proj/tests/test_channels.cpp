#include <doctest.h>

#include <cmath>

#include "common.hpp"
#include "oracles.hpp"
#include "sqe/channels.hpp"
#include "sqe/scenarios.hpp"

using namespace sqe;
using testing::kind_of;

namespace {

// Kraus operators of qubit loss written out by hand.
std::vector<Matrix> loss_kraus(double t) {
  Matrix e0 = Matrix::Zero(2, 2), e1 = Matrix::Zero(2, 2);
  e0(0, 0) = 1;
  e0(1, 1) = t;
  e1(0, 1) = std::sqrt(1 - t * t);
  return {e0, e1};
}

Matrix on_qubit(const Matrix& e, int target, int n) {
  Matrix out = Matrix::Identity(1, 1);
  for (int k = 0; k < n; ++k) out = oracle::kron(out, k == target ? e : Matrix(Matrix::Identity(2, 2)));
  return out;
}

// Tr[rho' |psi><psi|] = sum over Kraus pairs of |<psi| E_k E_l |psi>|^2.
double trajectory_overlap(const Vector& psi, int a, int b, double ta, double tb) {
  double sum = 0;
  for (const auto& ea : loss_kraus(ta))
    for (const auto& eb : loss_kraus(tb)) sum += std::norm(psi.dot(on_qubit(ea, a, 4) * on_qubit(eb, b, 4) * psi));
  return sum;
}

double lossy_value(int a, int b, double ta, double tb) {
  const auto rho = amplitude_loss(amplitude_loss(DensityOperator::from_pure(cluster_state()), a, ta), b, tb);
  return expectation(cluster_projector(), rho);
}

}  // namespace

TEST_SUITE("channels") {

TEST_CASE("white noise") {
  const auto rho = DensityOperator::from_pure(cluster_state());
  CHECK((white_noise(rho, 0.0).matrix() - rho.matrix()).norm() < 1e-15);
  CHECK((white_noise(rho, 1.0).matrix() - Matrix::Identity(16, 16) / 16.0).norm() < 1e-15);
  CHECK(std::abs(expectation(cluster_projector(), white_noise(rho, 8.0 / 15)) - 0.5) < 1e-14);
  CHECK(kind_of([&] { white_noise(rho, -0.1); }) == ErrorKind::kInvalidArgument);
  CHECK(kind_of([&] { white_noise(rho, 1.1); }) == ErrorKind::kInvalidArgument);
  const Matrix mid = white_noise(rho, 0.3).matrix();
  CHECK((mid - (0.7 * rho.matrix() + 0.3 * Matrix::Identity(16, 16) / 16.0)).norm() < 1e-15);
}

TEST_CASE("loss channel structure") {
  const auto ch = amplitude_loss_channel(1, 0.6);
  CHECK(ch.trace_preservation_defect() < 1e-12);
  const auto rho = DensityOperator::from_pure(cluster_state());
  CHECK((amplitude_loss(rho, 2, 1.0).matrix() - rho.matrix()).norm() < 1e-15);

  const auto dead = amplitude_loss(rho, 0, 0.0);
  const Matrix q0 = partial_trace(dead.matrix(), dead.shape(), std::vector<int>{0});
  CHECK(std::abs(q0(1, 1)) < 1e-15);
  CHECK(std::abs(q0(0, 0) - 1.0) < 1e-15);

  oracle::Rng rng(89);
  const DensityOperator random(SystemShape({2, 2, 2, 2}), rng.psd(16, 4));
  const auto ab = amplitude_loss(amplitude_loss(random, 1, 0.3), 3, 0.8);
  const auto ba = amplitude_loss(amplitude_loss(random, 3, 0.8), 1, 0.3);
  CHECK((ab.matrix() - ba.matrix()).norm() < 1e-12);
  CHECK(std::abs(ab.matrix().trace().real() - 1.0) < 1e-12);

  const auto qutrit = DensityOperator::maximally_mixed(SystemShape({2, 3}));
  CHECK(kind_of([&] { amplitude_loss(qutrit, 1, 0.5); }) == ErrorKind::kInvalidArgument);
  CHECK(kind_of([&] { amplitude_loss(rho, 0, 1.5); }) == ErrorKind::kInvalidArgument);

  std::vector<Matrix> broken{Matrix::Identity(2, 2), Matrix::Identity(2, 2)};
  CHECK(kind_of([&] { KrausChannel(0, broken); }) == ErrorKind::kInvalidArgument);
}

TEST_CASE("loss on qubits 2 and 4 and on qubits 1 and 2") {
  const Vector psi = cluster_state().amplitudes();
  for (int i = 0; i <= 8; ++i)
    for (int j = 0; j <= 8; ++j) {
      const double x = i / 8.0, y = j / 8.0;
      const double v24 = lossy_value(1, 3, x, y);
      CHECK(std::abs(v24 - std::pow(1 + x, 2) * std::pow(1 + y, 2) / 16) < 1e-12);
      CHECK(std::abs(v24 - trajectory_overlap(psi, 1, 3, x, y)) < 1e-12);

      const double v12 = lossy_value(0, 1, x, y);
      const double f12 = (std::pow(1 + x, 2) * std::pow(1 + y, 2) + (1 - x * x) * std::pow(1 - y, 2)) / 16;
      CHECK(std::abs(v12 - f12) < 1e-12);
      CHECK(std::abs(v12 - trajectory_overlap(psi, 0, 1, x, y)) < 1e-12);
    }
  // Loss on qubit 2 alone changes the value; a formula in t_1 would read 1 here.
  CHECK(std::abs(lossy_value(1, 3, 0.2, 1.0) - 1.0) > 0.5);
}

TEST_CASE("Fock dephasing") {
  const auto lambdas = geometric_lambdas(8);
  const Matrix c = ghz_coefficients(lambdas);
  CHECK((fock_dephase(c, DephasingSpec(0.0)) - c).norm() == 0.0);

  const Matrix far = fock_dephase(c, DephasingSpec(1e3));
  for (Index i = 0; i < 8; ++i)
    for (Index j = 0; j < 8; ++j) {
      if (i == j) CHECK(far(i, i) == c(i, i));
      else CHECK(std::abs(far(i, j)) < 1e-200);
    }

  Matrix prev = c;
  for (double s2 : {0.01, 0.1, 0.5, 1.0, 3.0, 10.0}) {
    const Matrix cur = fock_dephase(c, DephasingSpec(s2));
    for (Index i = 0; i < 8; ++i)
      for (Index j = 0; j < 8; ++j) CHECK(std::abs(cur(i, j)) <= std::abs(prev(i, j)) + 1e-300);
    prev = cur;
  }
  CHECK_THROWS_AS(DephasingSpec(-1.0), Error);
  CHECK(DephasingSpec::from_local({0.5, 0.25, 0.25}).sigma_sq_total == doctest::Approx(1.0));
}

TEST_CASE("GHZ witness value") {
  const auto lambdas = geometric_lambdas(40);
  const auto at0 = ghz_witness_value(lambdas, 0.0, true);
  CHECK(at0.value == 1.0);
  CHECK(at0.tail_bound <= 2 * std::pow(2.0, -40) + 1e-15);
  CHECK(ghz_level(lambdas, 2) == doctest::Approx(0.75).epsilon(1e-12));

  double sum4 = 0;
  for (double l : lambdas) sum4 += std::pow(l, 4);
  double prev = 2.0;
  for (double s2 = 0.0; s2 <= 50.0; s2 += 0.25) {
    const double v = ghz_witness_value(lambdas, s2, true).value;
    CHECK(v < prev);
    CHECK(v > sum4 / std::pow(ghz_level(lambdas, 40), 2) - 1e-15);
    CHECK(v <= 1.0 + 1e-15);
    prev = v;
  }

  // Only the total variance enters, however it is split over the modes.
  for (double s2 : {0.01, 0.3, 2.0}) {
    const double two = ghz_witness_value(lambdas, DephasingSpec::from_local({s2 / 2, s2 / 2}).sigma_sq_total, true).value;
    const double hundred =
        ghz_witness_value(lambdas, DephasingSpec::from_local(std::vector<double>(100, s2 / 100)).sigma_sq_total, true).value;
    CHECK(std::abs(two - hundred) < 1e-14);
  }

  std::vector<double> loose{0.5, 0.5};
  CHECK(kind_of([&] { ghz_witness_value(loose, 0.1); }) == ErrorKind::kInvalidArgument);
}

TEST_CASE("compact and dense dephasing paths agree") {
  const auto lambdas = geometric_lambdas(6);
  for (double s2 : {0.0, 1e-3, 0.1, 1.0, 10.0}) {
    const double compact = ghz_witness_value(lambdas, s2, true).value;
    CHECK(std::abs(ghz_dense_value(lambdas, 3, s2) - compact) < 1e-10);
    CHECK(std::abs(ghz_dense_value(lambdas, 2, s2) - compact) < 1e-10);
    const Matrix c = fock_dephase(ghz_coefficients(lambdas) / ghz_level(lambdas, 6), DephasingSpec(s2));
    CHECK(std::abs(ghz_expectation(c, lambdas) - compact) < 1e-12);
  }

  // Dephasing a single mode of the dense state damps (i, j) by exp(-s2 (i-j)^2 / 2).
  const PureState psi = ghz_state(lambdas, 2);
  const auto rho = local_phase_diffusion(DensityOperator::from_pure(psi), 1, 0.7);
  const Vector& a = psi.amplitudes();
  for (Index i = 0; i < 6; ++i)
    for (Index j = 0; j < 6; ++j) {
      const Index fi = i * 6 + i, fj = j * 6 + j;
      const cplx want = a(fi) * std::conj(a(fj)) * std::exp(-0.7 * double((i - j) * (i - j)) / 2);
      CHECK(std::abs(rho.matrix()(fi, fj) - want) < 1e-14);
    }
}

TEST_CASE("GHZ state constructor") {
  const auto lambdas = geometric_lambdas(4);
  const PureState psi = ghz_state(lambdas, 3);
  CHECK(psi.shape().dims() == std::vector<int>{4, 4, 4});
  CHECK(std::abs(psi.norm() - 1.0) < 1e-14);
  CHECK(std::abs(std::abs(psi.amplitudes()(0)) - lambdas[0] / std::sqrt(ghz_level(lambdas, 4))) < 1e-14);
}

}
