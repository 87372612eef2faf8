#include <doctest.h>

#include <cmath>

#include "common.hpp"
#include "oracles.hpp"
#include "sqe/channels.hpp"
#include "sqe/scenarios.hpp"
#include "sqe/witness.hpp"

using namespace sqe;
using testing::kind_of;

namespace {

const GRTable& cluster_table() {
  static const GRTable table = build_gr_table(cluster_projector(), cluster_partitions());
  return table;
}

GREntry exact_entry(double g) {
  GREntry e;
  e.g = g;
  e.exact = true;
  e.method = SolveMethod::kClosedFormOpb;
  return e;
}

DensityOperator noisy_cluster(double mu) {
  return white_noise(DensityOperator::from_pure(cluster_state()), mu);
}

}  // namespace

TEST_SUITE("witness") {

TEST_CASE("witness spectrum and expectation identity") {
  const HermitianOperator l = cluster_projector();
  const HermitianOperator w = make_witness(l, 0.25);
  const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Matrix>(w.matrix()).eigenvalues();
  CHECK(std::abs(ev(0) + 0.75) < 1e-14);
  for (Index k = 1; k < 16; ++k) CHECK(std::abs(ev(k) - 0.25) < 1e-14);

  const HermitianOperator id = HermitianOperator::identity(l.shape());
  CHECK(make_witness(id, 1.0).matrix().norm() == 0.0);

  oracle::Rng rng(83);
  for (int trial = 0; trial < 5; ++trial) {
    const DensityOperator rho(l.shape(), rng.psd(16, 1 + trial));
    CHECK(std::abs(expectation(w, rho) - (0.25 - expectation(l, rho))) < 1e-12);
  }
  for (const auto& p : cluster_table().partitions())
    for (int r = 1; r <= cluster_table().max_r(p); ++r) {
      const double g = cluster_table().at(p, r).g;
      if (g < 1 - 1e-12) CHECK(expectation(make_witness(l, g), cluster_state()) < 0);
    }
}

TEST_CASE("certification") {
  const HermitianOperator l = cluster_projector();
  CHECK(certify(DensityOperator::from_pure(cluster_state()), l, exact_entry(0.25)));
  CHECK_FALSE(certify(noisy_cluster(0.9), l, exact_entry(0.25)));
  CHECK(std::abs(expectation(l, noisy_cluster(0.9)) - 0.15625) < 1e-14);
  const auto mixed = DensityOperator::maximally_mixed(l.shape());
  CHECK_FALSE(certify(mixed, l, exact_entry(1.0 / 16)));
  CHECK_FALSE(certify(mixed, l, exact_entry(0.25)));

  // Tr = 1/2 exactly: the strict inequality refuses it even with zero margin.
  const auto boundary = noisy_cluster(8.0 / 15.0);
  const double tr = expectation(l, boundary);
  CHECK(std::abs(tr - 0.5) < 1e-14);
  CHECK_FALSE(certify(boundary, l, exact_entry(tr), 0.0));
  CHECK_FALSE(certify(boundary, l, exact_entry(0.5)));

  GREntry lower = exact_entry(0.25);
  lower.exact = false;
  CHECK(kind_of([&] { certify(mixed, l, lower); }) == ErrorKind::kSoundness);
}

TEST_CASE("cluster table contents") {
  const GRTable& t = cluster_table();
  CHECK(t.partitions().size() == 14);
  CHECK(check_consistency(t).empty());
  CHECK(t.at(Partition::parse("1,3:2,4"), 3).g == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(t.value(Partition::parse("1:2,3,4"), 4) == doctest::Approx(1.0));
  CHECK(t.max_r(Partition::parse("1:2,3,4")) == 2);
  CHECK(t.max_r(Partition::whole(4)) == 0);
  for (const auto& [key, entry] : t.entries) {
    CHECK(entry.exact);
    REQUIRE(entry.heuristic_g.has_value());
    CHECK(std::abs(*entry.heuristic_g - entry.g) < 1e-8);
  }
  CHECK(t.operator_hash == operator_hash(cluster_projector()));
  CHECK(t.operator_hash.size() == 16);
}

TEST_CASE("reports") {
  const HermitianOperator l = cluster_projector();
  const GRTable& t = cluster_table();

  const auto pure = sqe_report(DensityOperator::from_pure(cluster_state()), l, t);
  for (const auto& e : pure.entries) CHECK(e.certified == (e.g < 1 - 1e-9));
  CHECK(pure.genuine_multipartite);

  const auto half = sqe_report(noisy_cluster(0.5), l, t);
  CHECK(half.genuine_multipartite);

  const auto far = sqe_report(noisy_cluster(0.81), l, t);
  CHECK_FALSE(far.genuine_multipartite);
  for (const auto& e : far.entries) CHECK_FALSE(e.certified);
  for (const auto& [p, r] : far.max_certified_r) CHECK(r == 0);

  const auto mixed2 = DensityOperator::maximally_mixed(SystemShape({2, 2}));
  CHECK(kind_of([&] { sqe_report(mixed2, l, t); }) == ErrorKind::kInvalidShape);
  GRTable other = t;
  other.operator_hash = "0000000000000000";
  CHECK_THROWS_AS(sqe_report(noisy_cluster(0.5), l, other), Error);
}

TEST_CASE("certificates nest along refinement and rank") {
  const HermitianOperator l = cluster_projector();
  const GRTable& t = cluster_table();
  const auto ps = t.partitions();
  for (double mu = 0.0; mu <= 1.0; mu += 0.05) {
    const auto rep = sqe_report(noisy_cluster(mu), l, t);
    const double tr = expectation(l, noisy_cluster(mu));
    for (const auto& e : rep.entries) {
      if (!e.certified) continue;
      for (const auto& q : ps) {
        if (!is_refinement(q, e.partition)) continue;
        for (int r = 1; r <= e.r; ++r) {
          const auto g = t.value(q, r);
          REQUIRE(g.has_value());
          if (*g <= tr - 1e-9) CHECK(certify(noisy_cluster(mu), l, t.at(q, std::min(r, t.max_r(q)))));
        }
      }
    }
  }
}

TEST_CASE("white-noise linearity") {
  const HermitianOperator l = cluster_projector();
  for (double mu : {0.0, 0.1, 0.37, 0.5, 0.9, 1.0})
    CHECK(std::abs(expectation(l, noisy_cluster(mu)) - (mu / 16 + (1 - mu))) < 1e-12);
}

TEST_CASE("rendering") {
  CHECK(display_label(Partition::parse("1,2:3:4")) == "3:4:1,2");
  CHECK(display_label(Partition::parse("1,3:2:4")) == "2:4:1,3");
  CHECK(format_decimal(0.25) == "0.250000000000");
  const std::string text = render_table_text(cluster_table());
  CHECK(text.find("P_3:4:1,2") != std::string::npos);
  CHECK(text.find("lower bound") == std::string::npos);
  const auto rep = sqe_report(noisy_cluster(0.5), cluster_projector(), cluster_table());
  CHECK(!render_report_text(rep).empty());
}

TEST_CASE("hash distinguishes operators and ignores signed zeros") {
  const HermitianOperator a = cluster_projector();
  const HermitianOperator b(a.shape(), 0.5 * a.matrix());
  CHECK(operator_hash(a) != operator_hash(b));
  Matrix z = Matrix::Zero(2, 2);
  Matrix nz = Matrix::Zero(2, 2);
  nz(0, 1) = cplx(-0.0, -0.0);
  nz(1, 0) = cplx(-0.0, 0.0);
  CHECK(operator_hash(HermitianOperator(SystemShape({2}), z)) ==
        operator_hash(HermitianOperator(SystemShape({2}), nz)));
  CHECK(operator_hash(HermitianOperator(SystemShape({2}), z)) !=
        operator_hash(HermitianOperator(SystemShape({4}), Matrix::Zero(4, 4))));
}

}
