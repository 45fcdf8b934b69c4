#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "olab/identities.hpp"
#include "oracle_helpers.hpp"

using namespace olab;

namespace {

ModelTemplate wigner_template(int K, double snr, double s_n) {
  ModelTemplate t;
  t.prior = PriorSpec::rademacher(K);
  t.base = snr > 0.0 ? BaseChannelSpec::spiked_wigner(snr) : BaseChannelSpec::none();
  t.s_n = s_n;
  return t;
}

ModelTemplate gen_template(int K, double snr, double s_n, int p) {
  ModelTemplate t = wigner_template(K, snr, s_n);
  t.matrix_channel = false;
  GenTemplate g;
  g.p = p;
  g.lambda_vec = Eigen::VectorXd::Ones(K);
  g.average_beta = true;
  t.gen = g;
  return t;
}

McConfig quick_mc(std::size_t draws, std::uint64_t seed) {
  McConfig mc;
  mc.draws_disorder = draws;
  mc.seed = seed;
  mc.jobs = 2;
  return mc;
}

}  // namespace

TEST_CASE("nishimori, exact quadrature mode") {
  const ModelTemplate t = wigner_template(1, 1.0, 0.5);
  SUBCASE("residual is float noise at n = 1 and 2") {
    for (int n : {1, 2}) {
      const IdentityReport r =
          check_nishimori_exact(t, n, q_entry_functional(0, 0), 12);
      CHECK(std::abs(r.lhs - r.rhs) <= 1e-8);
      CHECK(r.pass);
    }
  }
  SUBCASE("n = 3, pure perturbation, tighter tolerance") {
    ModelTemplate pure = wigner_template(1, 0.0, 0.5);
    const IdentityReport r =
        check_nishimori_exact(pure, 3, q_entry_sq_functional(0, 0), 6, 1e-10);
    CHECK(std::abs(r.lhs - r.rhs) <= 1e-10);
  }
  SUBCASE("residual is node-count independent (algebraic identity)") {
    const IdentityReport a =
        check_nishimori_exact(t, 1, q_entry_functional(0, 0), 5);
    const IdentityReport b =
        check_nishimori_exact(t, 1, q_entry_functional(0, 0), 30);
    CHECK(std::abs(a.lhs - a.rhs) <= 1e-10);
    CHECK(std::abs(b.lhs - b.rhs) <= 1e-10);
    // the estimates themselves converge with node count
    CHECK(b.lhs ==
          doctest::Approx(check_nishimori_exact(t, 1, q_entry_functional(0, 0), 40).lhs)
              .epsilon(1e-4));
  }
}

TEST_CASE("nishimori, monte carlo mode") {
  SUBCASE("generic functional z-score") {
    const ModelTemplate t = wigner_template(1, 1.0, 0.5);
    const IdentityReport r =
        check_nishimori(t, 3, q_entry_functional(0, 0), quick_mc(2000, 5));
    CHECK(r.pass);
    CHECK(r.se > 0.0);
  }
  SUBCASE("free centered model: both sides vanish identically") {
    ModelTemplate t = wigner_template(1, 0.0, 0.5);
    t.matrix_channel = false;
    const IdentityReport r =
        check_nishimori(t, 2, q_entry_functional(0, 0), quick_mc(200, 5));
    CHECK(std::abs(r.lhs) < 1e-14);
    CHECK(std::abs(r.rhs) < 1e-14);
  }
  SUBCASE("closed-form suite matches the generic route") {
    const ModelTemplate t = wigner_template(2, 1.0, 0.5);
    const McConfig mc = quick_mc(300, 9);
    const auto suite = check_nishimori_suite(t, 3, mc);
    const IdentityReport generic =
        check_nishimori(t, 3, q_entry_functional(0, 1), mc);
    bool found = false;
    for (const auto& r : suite) {
      if (r.name == "nishimori:Q[1,2]") {
        found = true;
        CHECK(r.lhs == doctest::Approx(generic.lhs).epsilon(1e-10));
        CHECK(r.rhs == doctest::Approx(generic.rhs).epsilon(1e-10));
      }
      CHECK(r.pass);
    }
    CHECK(found);
  }
}

TEST_CASE("l-q relation") {
  SUBCASE("K=1: z within band") {
    const ModelTemplate t = wigner_template(1, 1.0, 0.5);
    const auto reports = check_l_q_relation(t, 2, quick_mc(4000, 3));
    REQUIRE(reports.size() == 1);
    CHECK(reports[0].pass);
  }
  SUBCASE("K=2: all entries, sampled lambda") {
    const ModelTemplate t = wigner_template(2, 1.0, 0.5);
    McConfig mc = quick_mc(500, 4);
    mc.draws_lambda = 4;
    mc.sample_lambda = true;
    const auto reports = check_l_q_relation(t, 2, mc);
    REQUIRE(reports.size() == 3);
    for (const auto& r : reports) CHECK(r.pass);
  }
  SUBCASE("weak perturbation: the overlap side goes to zero") {
    ModelTemplate t = wigner_template(1, 0.0, 1e-4);
    const auto reports = check_l_q_relation(t, 2, quick_mc(500, 6));
    CHECK(std::abs(reports[0].rhs) <= 1e-2);
  }
}

TEST_CASE("gg identity") {
  const ModelTemplate t = gen_template(1, 1.0, 0.5, 1);
  const std::vector<int> grid = {4, 6};

  SUBCASE("f = 1 collapse: fast path matches the generic bracket route") {
    const McConfig mc = quick_mc(300, 12);
    const GgReport fast = check_gg_nishimori_collapse(t, grid, mc);
    GgFunctional one;
    one.name = "f=1";
    one.eval = [](std::span<const Eigen::MatrixXd* const>) { return 1.0; };
    const GgReport generic = check_gg_identity(t, grid, one, 1, mc);
    REQUIRE(fast.per_n.size() == generic.per_n.size());
    for (std::size_t i = 0; i < fast.per_n.size(); ++i) {
      // the generic residual is E<Q01> - E<Q12>, the difference of the
      // collapse report's two sides
      CHECK(fast.per_n[i].lhs - fast.per_n[i].rhs ==
            doctest::Approx(generic.per_n[i].lhs).epsilon(1e-9));
    }
  }
  SUBCASE("f = Q01 fast path matches the generic route") {
    const McConfig mc = quick_mc(300, 13);
    const GgReport fast = check_gg_overlap(t, grid, mc);
    GgFunctional fq;
    fq.name = "f=Q01";
    fq.eval = [](std::span<const Eigen::MatrixXd* const> s) {
      return generalized_overlap(*s[0], *s[1], 1, Eigen::VectorXd::Ones(1));
    };
    const GgReport generic = check_gg_identity(t, grid, fq, 1, mc);
    for (std::size_t i = 0; i < fast.per_n.size(); ++i)
      CHECK(fast.per_n[i].lhs ==
            doctest::Approx(generic.per_n[i].lhs).epsilon(1e-9));
  }
  SUBCASE("collapse passes at every n") {
    const GgReport rep = check_gg_nishimori_collapse(t, grid, quick_mc(3000, 14));
    for (const auto& r : rep.per_n) CHECK(r.pass);
  }
  SUBCASE("p = 2 channel works through the generic moment route") {
    const ModelTemplate t2 = gen_template(1, 0.0, 0.5, 2);
    const GgReport rep =
        check_gg_nishimori_collapse(t2, std::vector<int>{3}, quick_mc(1500, 15));
    CHECK(rep.per_n[0].pass);
  }
  SUBCASE("replica tuple budget enforced, also through parallel workers") {
    GgFunctional one;
    one.name = "f=1";
    one.eval = [](std::span<const Eigen::MatrixXd* const>) { return 1.0; };
    // A = 3 needs four posterior replicas: 256^4 tuples at n = 8
    CHECK_THROWS_AS(
        check_gg_identity(t, std::vector<int>{8}, one, 3, quick_mc(1, 16)),
        resource_limit);
    CHECK_THROWS_AS(
        check_gg_identity(t, std::vector<int>{8}, one, 3, quick_mc(8, 16)),
        resource_limit);
  }
}

TEST_CASE("fluctuation split") {
  SUBCASE("zero lambda vector: everything vanishes") {
    ModelTemplate t = gen_template(1, 1.0, 0.5, 1);
    t.gen->lambda_vec = Eigen::VectorXd::Zero(1);
    const FluctReport rep =
        check_fluctuation_split(t, std::vector<int>{3}, quick_mc(100, 2));
    CHECK(rep.points[0].thermal == doctest::Approx(0.0));
    CHECK(rep.points[0].total == doctest::Approx(0.0));
    CHECK(rep.points[0].cross.lhs == doctest::Approx(0.0));
  }
  SUBCASE("cross identity and brace decay") {
    const ModelTemplate t = gen_template(1, 1.0, 0.5, 1);
    const FluctReport rep =
        check_fluctuation_split(t, std::vector<int>{4, 8}, quick_mc(4000, 21));
    for (const auto& p : rep.points) CHECK(p.cross.pass);
    CHECK(rep.brace_sum_decreasing);
    // brace sum = thermal + total by construction of the estimators
    for (const auto& p : rep.points)
      CHECK(p.brace_sum == doctest::Approx(p.thermal + p.total).epsilon(1e-9));
  }
}

TEST_CASE("reports are reproducible bit for bit") {
  const ModelTemplate t = wigner_template(1, 1.0, 0.5);
  const McConfig mc = quick_mc(500, 77);
  const auto a = check_nishimori_suite(t, 3, mc);
  const auto b = check_nishimori_suite(t, 3, mc);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].lhs == b[i].lhs);
    CHECK(a[i].rhs == b[i].rhs);
    CHECK(a[i].se == b[i].se);
  }
}

TEST_CASE("sampler check") {
  ModelSpec m;
  m.prior = PriorSpec::rademacher(2);
  m.base = BaseChannelSpec::spiked_wigner(2.0);
  m.lambda = SnrMatrix::midpoint(2, 0.5);
  m.n = 3;
  const SamplerCheck sc = check_sampler(m, 5, 128, 80, 40, 6, 3.0);
  CHECK(sc.reports.size() == 4);
  for (const auto& r : sc.reports) CHECK(r.pass);
  CHECK(sc.diag.rhat < 1.1);
}

TEST_CASE("mmse identities") {
  for (int K : {1, 2}) {
    const ModelTemplate t = wigner_template(K, 1.0, 0.5);
    const auto reports = check_mmse_identities(t, 4, quick_mc(2500, 31));
    REQUIRE(reports.size() == 2);
    CHECK(reports[0].name == "mmse");
    CHECK(reports[0].pass);
    CHECK(reports[1].name == "matrix_mmse");
    CHECK(reports[1].pass);
  }
}
