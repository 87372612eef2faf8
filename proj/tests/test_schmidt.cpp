#include <doctest.h>

#include <cmath>

#include "common.hpp"
#include "oracles.hpp"
#include "sqe/channels.hpp"
#include "sqe/scenarios.hpp"
#include "sqe/schmidt.hpp"

using namespace sqe;
using testing::kind_of;

namespace {

std::vector<int> first_block(const Partition& p) { return p.block(0); }

Vector reconstruct(const SchmidtDecomposition& s) {
  Vector out = Vector::Zero(s.left_vectors[0].size() * s.right_vectors[0].size());
  for (std::size_t k = 0; k < s.coefficients.size(); ++k)
    out += s.coefficients[k] * kron(s.left_vectors[k], s.right_vectors[k]);
  return out;
}

}  // namespace

TEST_SUITE("schmidt") {

TEST_CASE("product state has rank one") {
  const PureState p00(SystemShape({2, 2}), basis_vector(4, 0));
  const auto s = bipartite_schmidt(p00, Partition::parse("1:2"));
  CHECK(s.rank == 1);
  CHECK(std::abs(s.coefficients[0] - 1.0) < 1e-14);
}

TEST_CASE("cluster state across the documented cuts") {
  const PureState psi = cluster_state();
  const auto a = bipartite_schmidt(psi, Partition::parse("1:2,3,4"));
  CHECK(a.rank == 2);
  for (int k = 0; k < 2; ++k) CHECK(std::abs(a.coefficients[k] - 1 / std::sqrt(2.0)) < 1e-12);

  const auto b = bipartite_schmidt(psi, Partition::parse("1,3:2,4"));
  CHECK(b.rank == 4);
  for (int k = 0; k < 4; ++k) CHECK(std::abs(b.coefficients[k] - 0.5) < 1e-12);

  CHECK(std::abs(g_r_bipartite(psi, Partition::parse("1,2:3,4"), 1) - 0.5) < 1e-12);
  CHECK(std::abs(g_r_bipartite(psi, Partition::parse("1,3:2,4"), 3) - 0.75) < 1e-12);
  CHECK(g_r_bipartite(psi, Partition::parse("1,3:2,4"), 9) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("errors") {
  const PureState psi = cluster_state();
  CHECK(kind_of([&] { bipartite_schmidt(psi, Partition::singletons(4)); }) ==
        ErrorKind::kInvalidArgument);
  CHECK(kind_of([&] { g_r_bipartite(psi, Partition::parse("1:2,3,4"), 0); }) ==
        ErrorKind::kInvalidArgument);
}

TEST_CASE("random states: reconstruction, orthonormality, oracle weights") {
  oracle::Rng rng(17);
  const std::vector<std::pair<std::vector<int>, const char*>> cases{
      {{2, 2, 2, 2}, "1,3:2,4"}, {{2, 3, 2}, "2:1,3"}, {{4, 4, 4}, "1,2:3"}, {{2, 2, 2, 2, 2, 2}, "1,4,5:2,3,6"}};
  for (const auto& [dims, label] : cases) {
    const SystemShape shape(dims);
    const Partition p = Partition::parse(label, shape.size());
    const PureState psi(shape, rng.state(shape.total_dim()));
    const auto s = bipartite_schmidt(psi, p);

    double sum = 0;
    for (std::size_t k = 0; k < s.coefficients.size(); ++k) {
      sum += s.coefficients[k] * s.coefficients[k];
      if (k > 0) CHECK(s.coefficients[k] <= s.coefficients[k - 1]);
    }
    CHECK(std::abs(sum - 1.0) < 1e-10);
    for (std::size_t i = 0; i < s.left_vectors.size(); ++i)
      for (std::size_t j = 0; j < s.left_vectors.size(); ++j) {
        const double want = i == j ? 1.0 : 0.0;
        CHECK(std::abs(s.left_vectors[i].dot(s.left_vectors[j]) - want) < 1e-10);
        CHECK(std::abs(s.right_vectors[i].dot(s.right_vectors[j]) - want) < 1e-10);
      }
    const Vector grouped = PartyLayout(shape, p).to_party_order(psi.amplitudes());
    CHECK((reconstruct(s) - grouped).norm() < 1e-10);

    double prev = 0;
    for (int r = 1; r <= s.rank; ++r) {
      const double g = g_r_bipartite(psi, p, r);
      CHECK(g >= prev - 1e-15);
      prev = g;
      CHECK(std::abs(g - oracle::schmidt_weight(psi.amplitudes(), dims, first_block(p), r)) < 1e-10);
    }
    CHECK(g_r_bipartite(psi, p, s.rank) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("multipartite Schmidt lower bound") {
  const PureState psi = cluster_state();
  CHECK(msn_lower_bound(psi, Partition::singletons(4)) == 4);
  CHECK(msn_lower_bound(psi, Partition::parse("1:2,3,4")) == 2);
  const PureState p0(SystemShape({2, 2, 2}), basis_vector(8, 5));
  CHECK(msn_lower_bound(p0, Partition::singletons(3)) == 1);
  for (int d : {2, 3, 4}) {
    const PureState ghz = ghz_state(geometric_lambdas(d), 3);
    for (const auto& p : enumerate_partitions(3))
      if (p.party_count() >= 2) CHECK(msn_lower_bound(ghz, p) == d);
  }
}

}
