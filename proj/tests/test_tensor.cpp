#include <doctest.h>

#include <cmath>
#include <numeric>

#include "common.hpp"
#include "oracles.hpp"
#include "sqe/channels.hpp"
#include "sqe/scenarios.hpp"
#include "sqe/tensor.hpp"

using namespace sqe;
using testing::kind_of;

namespace {

const double s2 = 1.0 / std::sqrt(2.0);

PureState qubit(double a, double b) {
  Vector v(2);
  v << a, b;
  return PureState(SystemShape({2}), v);
}

Vector plus() { return qubit(s2, s2).amplitudes(); }
Vector minus() { return qubit(s2, -s2).amplitudes(); }
Vector ket(int k) { return basis_vector(2, k); }

}  // namespace

TEST_SUITE("tensor") {

TEST_CASE("shape arithmetic") {
  const SystemShape s({2, 3, 2});
  CHECK(s.total_dim() == 12);
  for (Index f = 0; f < 12; ++f) CHECK(s.ravel(s.unravel(f)) == f);
  CHECK(s.unravel(7) == std::vector<int>{1, 0, 1});
}

TEST_CASE("product states") {
  const PureState zero = qubit(1, 0);
  std::vector<PureState> parts{zero, zero};
  const PureState p00 = product_state(parts);
  CHECK(p00.amplitudes()(0) == cplx(1.0));
  CHECK(p00.amplitudes().norm() == doctest::Approx(1.0).epsilon(1e-14));

  parts = {qubit(s2, s2), zero};
  const Vector v = product_state(parts).amplitudes();
  CHECK(std::abs(v(0) - s2) < 1e-15);
  CHECK(std::abs(v(1)) < 1e-15);
  CHECK(std::abs(v(2) - s2) < 1e-15);
  CHECK(std::abs(v(3)) < 1e-15);

  parts = {qubit(s2, s2), zero, qubit(s2, s2), zero};
  const Vector first = product_state(parts).amplitudes();
  for (Index k : {0, 2, 8, 10}) CHECK(std::abs(first(k) - 0.5) < 1e-15);
  CHECK(std::abs(first.norm() - 1.0) < 1e-14);

  CHECK(kind_of([] { product_state(std::span<const PureState>()); }) == ErrorKind::kInvalidShape);
  CHECK(kind_of([] { SystemShape({2, 0}); }) == ErrorKind::kInvalidShape);
}

TEST_CASE("cluster state matches its four-term expansion") {
  const Vector psi = cluster_state().amplitudes();
  Vector expect = Vector::Zero(16);
  const Vector terms[4][4] = {{plus(), ket(0), plus(), ket(0)},
                              {plus(), ket(0), minus(), ket(1)},
                              {minus(), ket(1), minus(), ket(0)},
                              {minus(), ket(1), plus(), ket(1)}};
  for (const auto& t : terms) expect += 0.5 * oracle::kron(oracle::kron(oracle::kron(t[0], t[1]), t[2]), t[3]);
  CHECK((psi - expect).norm() < 1e-14);
  CHECK(std::abs(psi.norm() - 1.0) < 1e-14);
}

TEST_CASE("kron agrees with the index-loop oracle") {
  oracle::Rng rng(7);
  const Matrix a = rng.mat(2), b = rng.mat(3);
  CHECK((kron(a, b) - oracle::kron(a, b)).norm() < 1e-14);
  const Vector x = rng.vec(3), y = rng.vec(4);
  CHECK((kron(x, y) - oracle::kron(x, y)).norm() < 1e-14);
}

TEST_CASE("operator validation") {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = 1.0;
  CHECK(kind_of([&] { HermitianOperator(SystemShape({2}), m); }) == ErrorKind::kInvalidArgument);
  CHECK_THROWS_AS(HermitianOperator(SystemShape({3}), Matrix::Identity(2, 2)), Error);
  CHECK(kind_of([&] { DensityOperator(SystemShape({2}), Matrix::Identity(2, 2)); }) ==
        ErrorKind::kInvalidArgument);
  Matrix neg = Matrix::Zero(2, 2);
  neg(0, 0) = 1.5;
  neg(1, 1) = -0.5;
  CHECK(kind_of([&] { DensityOperator(SystemShape({2}), neg); }) == ErrorKind::kInvalidArgument);
  CHECK(HermitianOperator::projector(cluster_state()).is_psd());
}

TEST_CASE("partial trace") {
  const HermitianOperator l = cluster_projector();
  const std::vector<int> all{0, 1, 2, 3};
  CHECK((partial_trace(l, all).matrix() - l.matrix()).norm() == 0.0);

  const std::vector<int> keep{0, 2};
  const Matrix red = partial_trace(l, keep).matrix();
  CHECK((red - Matrix::Identity(4, 4) / 4.0).norm() < 1e-14);

  oracle::Rng rng(11);
  const std::vector<int> dims{2, 3, 2};
  for (int trial = 0; trial < 10; ++trial) {
    const HermitianOperator a(SystemShape(dims), rng.hermitian(12));
    for (const std::vector<int>& k : {std::vector<int>{0}, {1}, {0, 2}, {2, 1}}) {
      std::vector<int> sorted = k;
      std::sort(sorted.begin(), sorted.end());
      const Matrix got = partial_trace(a, sorted).matrix();
      CHECK((got - oracle::partial_trace(a.matrix(), dims, sorted)).norm() < 1e-12);
      CHECK(std::abs(got.trace().real() - a.trace()) < 1e-12);
      CHECK((got - got.adjoint()).norm() < 1e-12);
    }
  }
  const std::vector<int> bad{0, 4};
  CHECK(kind_of([&] { partial_trace(l, bad); }) == ErrorKind::kInvalidIndex);
}

TEST_CASE("permutations") {
  const PureState psi = cluster_state();
  const std::vector<int> id{0, 1, 2, 3}, swap{1, 0, 2, 3}, p1324{0, 2, 1, 3};
  CHECK(permute_subsystems(psi, id).amplitudes() == psi.amplitudes());
  const PureState twice = permute_subsystems(permute_subsystems(psi, swap), swap);
  CHECK(twice.amplitudes() == psi.amplitudes());

  // Grouped as (1,3)(2,4) the state is a sum of four orthogonal products.
  const Vector grouped = permute_subsystems(psi, p1324).amplitudes();
  Vector expect = Vector::Zero(16);
  const Vector terms[4][2] = {{oracle::kron(plus(), plus()), oracle::kron(ket(0), ket(0))},
                              {oracle::kron(plus(), minus()), oracle::kron(ket(0), ket(1))},
                              {oracle::kron(minus(), minus()), oracle::kron(ket(1), ket(0))},
                              {oracle::kron(minus(), plus()), oracle::kron(ket(1), ket(1))}};
  for (const auto& t : terms) expect += 0.5 * oracle::kron(t[0], t[1]);
  CHECK((grouped - expect).norm() < 1e-14);

  const Vector back = permute_subsystems(grouped, SystemShape({2, 2, 2, 2}), inverse_permutation(p1324));
  CHECK(back == psi.amplitudes());

  oracle::Rng rng(3);
  const SystemShape s({2, 3, 4});
  const Vector v = rng.state(24);
  const std::vector<int> perm{2, 0, 1};
  const Vector pv = permute_subsystems(v, s, perm);
  CHECK(std::abs(pv.norm() - 1.0) < 1e-14);
  for (Index f = 0; f < 24; ++f) {
    const auto d = s.unravel(f);
    const std::vector<int> pd{d[2], d[0], d[1]};
    CHECK(pv(s.permuted(perm).ravel(pd)) == v(f));
  }
  const std::vector<int> bad{0, 0, 1};
  CHECK(kind_of([&] { permute_subsystems(v, s, bad); }) == ErrorKind::kInvalidArgument);
}

TEST_CASE("partial inner products") {
  const Partition p = Partition::singletons(4);
  const HermitianOperator id = HermitianOperator::identity(SystemShape({2, 2, 2, 2}));
  oracle::Rng rng(5);
  std::vector<Vector> u{rng.state(2), rng.state(2), rng.state(2)};
  CHECK((partial_inner(u, id, u, p, 3) - Matrix::Identity(2, 2)).norm() < 1e-14);

  const std::vector<Vector> bra{plus(), ket(0), plus()};
  Matrix expect = Matrix::Zero(2, 2);
  expect(0, 0) = 0.25;
  CHECK((partial_inner(bra, cluster_projector(), bra, p, 3) - expect).norm() < 1e-14);

  const HermitianOperator a(SystemShape({2, 2, 2, 2}), rng.hermitian(16));
  std::vector<Vector> v{rng.vec(2), rng.vec(2), rng.vec(2)};
  CHECK((partial_inner(u, a, v, p, 1) - partial_inner(v, a, u, p, 1).adjoint()).norm() < 1e-12);

  const Partition q = Partition::parse("1,3:2,4");
  std::vector<Vector> block{rng.vec(4)};
  const Matrix m = partial_inner(block, a, block, q, 1);
  CHECK(m.rows() == 4);
  std::vector<Vector> wrong{rng.vec(2)};
  CHECK(kind_of([&] { partial_inner(wrong, a, wrong, q, 1); }) == ErrorKind::kInvalidShape);
}

TEST_CASE("contraction consistency") {
  oracle::Rng rng(9);
  const Partition p = Partition::parse("1:2,3:4");
  const HermitianOperator a(SystemShape({2, 3, 2, 2}), rng.hermitian(24));
  for (int trial = 0; trial < 5; ++trial) {
    const Vector x = rng.state(2), y = rng.state(6), z = rng.state(2);
    std::vector<PureState> parts{PureState(SystemShape({2}), x), PureState(SystemShape({3, 2}), y),
                                 PureState(SystemShape({2}), z)};
    const double full = expectation(a, product_state(parts));
    std::vector<Vector> others{x, z};
    const Matrix m = partial_inner(others, a, others, p, 1);
    CHECK(std::abs(full - y.dot(m * y).real()) < 1e-12);
  }
}

TEST_CASE("expectations") {
  const HermitianOperator l = cluster_projector();
  CHECK(std::abs(expectation(l, cluster_state()) - 1.0) < 1e-14);
  const DensityOperator rho = white_noise(DensityOperator::from_pure(cluster_state()), 0.4);
  CHECK(std::abs(expectation(l, rho) - 0.625) < 1e-14);
  CHECK(kind_of([&] { expectation(l, DensityOperator::maximally_mixed(SystemShape({2, 2}))); }) ==
        ErrorKind::kInvalidShape);
}

TEST_CASE("party layout round trip") {
  oracle::Rng rng(13);
  const SystemShape s({2, 3, 2, 2});
  const PartyLayout layout(s, Partition::parse("1,3:2,4"));
  CHECK(layout.party_dims() == std::vector<Index>{4, 6});
  const Vector v = rng.vec(24);
  CHECK(layout.from_party_order(layout.to_party_order(v)) == v);
  const Matrix m = rng.mat(24);
  CHECK(layout.from_party_order(layout.to_party_order(m)) == m);
}

}
