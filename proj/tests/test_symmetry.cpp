#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>

#include "olab/posterior.hpp"
#include "olab/symmetry.hpp"

using namespace olab;

namespace {

// independent brute force over vertex bitmasks: the largest m with two
// disjoint m-subsets fully oriented V1 -> V2
int brute_force_max_m(const TournamentOrientation& t) {
  const int n = t.n_rep;
  int best = 0;
  for (unsigned m1 = 1; m1 < (1u << n); ++m1)
    for (unsigned m2 = 1; m2 < (1u << n); ++m2) {
      if ((m1 & m2) != 0) continue;
      if (std::popcount(m1) != std::popcount(m2)) continue;
      bool ok = true;
      for (int u = 0; u < n && ok; ++u) {
        if (!(m1 >> u & 1)) continue;
        for (int v = 0; v < n && ok; ++v)
          if ((m2 >> v & 1) && !t.edge(u, v)) ok = false;
      }
      if (ok) best = std::max(best, std::popcount(m1));
    }
  return best;
}

}  // namespace

TEST_CASE("constant extraction") {
  SUBCASE("identical symmetric blocks read off directly") {
    const auto arr = constant_block_array(5, 0.4, 0.25, 0.9);
    const OverlapConstants c = extract_constants(arr, 0, 1, 1e-12);
    CHECK(c.a == doctest::Approx(0.4));
    CHECK(c.d == doctest::Approx(0.9));
    CHECK(c.x == doctest::Approx(0.5));
    CHECK(c.y == doctest::Approx(2 * 0.25 * 0.25));
    CHECK(c.max_dev <= 1e-12);
  }
  SUBCASE("alternating pattern gives (a, d, b+c, b^2+c^2)") {
    Rng rng(4);
    const auto orient = random_orientation(7, rng);
    const double a = 0.6, b = 0.35, c = 0.1, d = 0.8;
    const auto arr = exact_block_array(7, a, b, c, d, 1.0, 1.0, 0.2, orient);
    const OverlapConstants cc = extract_constants(arr, 0, 1, 1e-12);
    CHECK(cc.a == doctest::Approx(a));
    CHECK(cc.d == doctest::Approx(d));
    CHECK(cc.x == doctest::Approx(b + c));
    CHECK(cc.y == doctest::Approx(b * b + c * c));
  }
  SUBCASE("a deviating block is rejected with the offending pair") {
    auto arr = constant_block_array(4, 0.4, 0.25, 0.9);
    arr.block(1, 2)(0, 0) += 0.05;
    try {
      extract_constants(arr, 0, 1, 1e-3);
      FAIL("expected not_replica_symmetric");
    } catch (const not_replica_symmetric& e) {
      CHECK(e.rep_a == 1);
      CHECK(e.rep_b == 2);
    }
  }
  SUBCASE("needs at least three replicas") {
    const auto arr = constant_block_array(2, 0.4, 0.25, 0.9);
    CHECK_THROWS_AS(extract_constants(arr, 0, 1, 1e-6), invalid_parameter);
  }
}

TEST_CASE("off-diagonal solve") {
  SUBCASE("worked examples") {
    auto [r1, q1] = solve_offdiagonal(2.0, 2.0, 1e-12);
    CHECK(r1 == doctest::Approx(1.0));
    CHECK(q1 == doctest::Approx(1.0));
    auto [r2, q2] = solve_offdiagonal(3.0, 5.0, 1e-12);
    CHECK(r2 == doctest::Approx(2.0));
    CHECK(q2 == doctest::Approx(1.0));
    auto [r3, q3] = solve_offdiagonal(0.0, 0.0, 1e-12);
    CHECK(r3 == doctest::Approx(0.0));
    CHECK(q3 == doctest::Approx(0.0));
  }
  SUBCASE("recombination property") {
    Rng rng(9);
    for (int t = 0; t < 200; ++t) {
      const double b = rng.uniform(-1.0, 1.0);
      const double c = rng.uniform(-1.0, 1.0);
      auto [r, q] = solve_offdiagonal(b + c, b * b + c * c, 1e-12);
      CHECK(r + q == doctest::Approx(b + c).epsilon(1e-12));
      CHECK(r * r + q * q == doctest::Approx(b * b + c * c).epsilon(1e-12));
      CHECK(r >= q);
    }
  }
  SUBCASE("inconsistent constants rejected") {
    CHECK_THROWS_AS(solve_offdiagonal(2.0, 1.0, 1e-9), inconsistent_constants);
  }
}

TEST_CASE("tournament orientation") {
  SUBCASE("tied case marks every edge") {
    const auto arr = constant_block_array(5, 0.4, 0.25, 0.9);
    const OverlapConstants c = extract_constants(arr, 0, 1, 1e-12);
    const auto t = orient_tournament(arr, 0, 1, c, 1e-9);
    for (auto tie : t.tie) CHECK(tie == 1);
    CHECK(t.edge(0, 3));  // low -> high convention
  }
  SUBCASE("synthetic round trip on a random 8-vertex tournament") {
    Rng rng(11);
    const auto orient = random_orientation(8, rng);
    const auto arr = exact_block_array(8, 0.5, 0.3, 0.1, 0.7, 1.0, 1.0, 0.2, orient);
    const OverlapConstants c = extract_constants(arr, 0, 1, 1e-12);
    const auto [b, q] = solve_offdiagonal(c.x, c.y, 1e-12);
    CHECK(b == doctest::Approx(0.3));
    CHECK(q == doctest::Approx(0.1));
    const auto rec = orient_tournament(arr, 0, 1, c, 1e-9);
    for (std::size_t s = 0; s < rec.forward.size(); ++s) {
      CHECK(rec.forward[s] == orient.forward[s]);
      CHECK(rec.tie[s] == 0);
    }
  }
}

TEST_CASE("one-directional subsets") {
  SUBCASE("transitive tournament on six vertices splits top/bottom") {
    const auto t = transitive_orientation(6);
    const SubsetPair sp = find_one_directional_subsets(t, 3);
    CHECK(sp.m == 3);
    CHECK(sp.exhaustive);
    CHECK(sp.v1 == std::vector<int>({0, 1, 2}));
    CHECK(sp.v2 == std::vector<int>({3, 4, 5}));
  }
  SUBCASE("three-cycle only admits m = 1") {
    TournamentOrientation t;
    t.n_rep = 3;
    // pairs (0,1), (0,2), (1,2): edges 0->1, 2->0, 1->2
    t.forward = {1, 0, 1};
    t.tie = {0, 0, 0};
    const SubsetPair sp = find_one_directional_subsets(t, 1);
    CHECK(sp.m == 1);
  }
  SUBCASE("exhaustive equals brute force up to eight replicas") {
    Rng rng(21);
    for (int trial = 0; trial < 6; ++trial) {
      const int n = 5 + trial % 4;
      const auto t = random_orientation(n, rng);
      const SubsetPair sp = find_one_directional_subsets(t, n / 2);
      CHECK(sp.m == brute_force_max_m(t));
      for (int u : sp.v1)
        for (int v : sp.v2) CHECK(t.edge(u, v));
    }
  }
  SUBCASE("greedy on a large transitive tournament") {
    const auto t = transitive_orientation(20);
    const SubsetPair sp = find_one_directional_subsets(t, 5);
    CHECK(sp.m == 5);
    CHECK(!sp.exhaustive);
    for (int u : sp.v1)
      for (int v : sp.v2) CHECK(t.edge(u, v));
  }
}

TEST_CASE("certification") {
  SUBCASE("constant b = c array: all gaps at float zero") {
    const auto arr = constant_block_array(12, 0.5, 0.3, 0.7);
    const auto rep = run_symmetry_pipeline(arr, 0, 1, 1e-8, 4);
    CHECK(rep.verdict);
    CHECK(rep.gap_u <= 1e-10);
    CHECK(rep.gap_w <= 1e-10);
    CHECK(rep.cross_gap <= 1e-10);
  }
  SUBCASE("planted asymmetry shrinks as the array grows") {
    double prev = 1e300;
    for (int n_rep : {8, 16, 32}) {
      const auto orient = transitive_orientation(n_rep);
      const auto arr = gram_planted_array(n_rep, 0.5, 0.8, 0.2, 0.8, 0.6, 0.3, orient);
      const auto rep = run_symmetry_pipeline(arr, 0, 1, 1e-9, 4, 0.2);
      CHECK(std::abs(rep.b - rep.c - 2.0 * 0.8 * 0.3 / std::sqrt(n_rep - 1.0)) <=
            1e-9);
      CHECK(rep.cross_gap < prev);
      CHECK(rep.gap_u <= rep.gap_u_bound + 1e-9);
      CHECK(rep.gap_w <= rep.gap_w_bound + 1e-9);
      CHECK(!rep.verdict);
      prev = rep.cross_gap;
    }
  }
  SUBCASE("barycentre gap nonincreasing in the subset size") {
    const auto orient = transitive_orientation(32);
    const auto arr = gram_planted_array(32, 0.5, 0.8, 0.2, 0.8, 0.6, 0.3, orient);
    double prev = 1e300;
    for (int m : {2, 4, 8}) {
      const auto rep = run_symmetry_pipeline(arr, 0, 1, 1e-9, m, 0.2);
      CHECK(rep.subsets.m == m);
      CHECK(rep.gap_u <= prev + 1e-12);
      prev = rep.gap_u;
    }
  }
  SUBCASE("non-PSD coordinate array rejected") {
    // wildly inconsistent constants: no Gram vectors realize them
    const auto orient = transitive_orientation(6);
    const auto arr = exact_block_array(6, 0.9, 0.9, -0.9, 0.9, 0.1, 0.1, 0.0, orient);
    TournamentReport partial;
    partial.tol = 1e-6;
    partial.subsets.v1 = {0, 1};
    partial.subsets.v2 = {4, 5};
    partial.subsets.m = 2;
    CHECK_THROWS_AS(certify_b_equals_c(arr, 0, 1, partial), not_psd);
  }
  SUBCASE("sampled posterior overlaps run end to end") {
    ModelSpec m;
    m.prior = PriorSpec::rademacher(2);
    m.base = BaseChannelSpec::spiked_wigner(1.0);
    m.lambda = SnrMatrix::midpoint(2, 0.5);
    m.n = 6;
    const DisorderSample d = generate_disorder(m, 3);
    const ReplicaBatch batch = gibbs_sample(m, d, 12, 60, 30, 5);
    const auto arr = sampled_overlap_array(batch.replicas);
    // Gram by construction
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(arr.coordinate_array(0, 1));
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);
    const auto rep = run_symmetry_pipeline(
        arr, 0, 1, 1e-6, 3, std::numeric_limits<double>::infinity());
    CHECK(std::isfinite(rep.cross_gap));
    CHECK(rep.constants.max_dev > 0.0);  // finite-size wobble is reported
    CHECK(rep.subsets.m >= 1);
  }
}
