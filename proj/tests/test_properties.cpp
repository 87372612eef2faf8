#include <doctest.h>

#include "property_checks.hpp"

TEST_SUITE("properties") {

TEST_CASE("alternating sweeps never decrease g") {
  const auto o = props::monotone_sweeps(60, 101);
  INFO(o.where);
  CHECK(o.worst < 1e-10);
}

TEST_CASE("g_r is nondecreasing in r and bounded by 1") {
  const auto o = props::rank_monotonicity(3, 103);
  INFO(o.where);
  CHECK(o.worst < 1e-8);
}

TEST_CASE("refinement never raises g_r") {
  const auto o = props::refinement_monotonicity(4, 107);
  INFO(o.where);
  CHECK(o.worst < 1e-8);
}

TEST_CASE("reported solutions pass the residual certificate") {
  const auto o = props::reported_residuals(4, 109);
  INFO(o.where);
  CHECK(o.worst < 1e-8);
}

TEST_CASE("local transforms act affinely on g_r") {
  const auto o = props::transform_covariance(100, 113);
  INFO(o.where);
  CHECK(o.worst < 1e-8);
}

TEST_CASE("spinor-space expectation identity") {
  const auto o = props::spinor_space_identity(100, 127);
  INFO(o.where);
  CHECK(o.worst < 1e-10);
}

TEST_CASE("two-qubit g_1 matches a grid search") {
  const auto o = props::two_qubit_grid(5, 131);
  INFO(o.where);
  CHECK(o.worst < 1e-4);
}

TEST_CASE("alternating solver agrees with Schmidt sums on bipartitions") {
  const auto o = props::bipartite_cross_oracle(20, 137);
  INFO(o.where);
  CHECK(o.worst < 1e-6);
}

}
