#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "olab/scaling.hpp"
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

ModelTemplate single_atom_template(double s_n) {
  ModelTemplate t;
  Eigen::VectorXd atom(1);
  atom << 1.0;
  t.prior = PriorSpec::single_atom(atom);
  t.base = BaseChannelSpec::spiked_wigner(1.0);
  t.s_n = s_n;
  return t;
}

ScanConfig quick_scan(std::vector<int> grid, std::size_t dl, std::size_t dd,
                      std::uint64_t seed) {
  ScanConfig sc;
  sc.n_grid = std::move(grid);
  sc.mc.draws_lambda = dl;
  sc.mc.draws_disorder = dd;
  sc.mc.sample_lambda = dl > 1;
  sc.mc.seed = seed;
  sc.mc.jobs = 2;
  return sc;
}

}  // namespace

TEST_CASE("lambda-ensemble averages") {
  const ModelTemplate t = wigner_template(1, 1.0, 0.5);
  McConfig mc;
  mc.draws_lambda = 16;
  mc.draws_disorder = 20;
  mc.sample_lambda = true;
  mc.seed = 3;
  mc.jobs = 2;
  SUBCASE("constant functional") {
    const LambdaAverage r = estimate_lambda_average(
        [](const DrawContext&) { return 1.0; }, t, 2, 0.5, mc);
    CHECK(r.estimate == doctest::Approx(1.0));
    CHECK(r.se == doctest::Approx(0.0));
  }
  SUBCASE("diagonal entry averages to 2.5 s") {
    const LambdaAverage r = estimate_lambda_average(
        [](const DrawContext& ctx) { return ctx.model.lambda.entries(0, 0); },
        t, 2, 0.5, mc);
    CHECK(std::abs(r.estimate - 1.25) <= 3.0 * r.se + 1e-12);
  }
  SUBCASE("smooth in lambda at tiny scale") {
    McConfig dense = mc;
    dense.draws_disorder = 400;
    auto q_mean = [](const DrawContext& ctx) {
      return (ctx.disorder.x.transpose() * ctx.posterior.mean() /
              ctx.model.n)(0, 0);
    };
    const LambdaAverage avg = estimate_lambda_average(q_mean, t, 2, 1e-3, dense);
    // same block layout but the midpoint matrix in every block
    McConfig fixed = dense;
    fixed.sample_lambda = false;
    const LambdaAverage mid = estimate_lambda_average(q_mean, t, 2, 1e-3, fixed);
    CHECK(std::abs(avg.estimate - mid.estimate) <=
          3.0 * std::sqrt(avg.se * avg.se + mid.se * mid.se) + 1e-6);
  }
}

TEST_CASE("thermal scan") {
  SUBCASE("single-atom prior: fluctuations vanish identically") {
    const ScalingRun run =
        run_thermal_scan(single_atom_template(0.5), quick_scan({2, 4}, 2, 20, 5));
    for (const auto& p : run.points) CHECK(p.estimate == doctest::Approx(0.0));
  }
  SUBCASE("rademacher wigner: decreasing with a steep slope") {
    const ScalingRun run = run_thermal_scan(wigner_template(1, 1.0, 0.5),
                                            quick_scan({2, 4, 8}, 8, 260, 7));
    const SeriesStat* st = run.stat("thermal_q");
    REQUIRE(st != nullptr);
    CHECK(st->decreasing_3se);
    CHECK(st->slope <= -0.25);
    const SeriesStat* gap = run.stat("gap_q12");
    REQUIRE(gap != nullptr);
    CHECK(gap->decreasing);
  }
}

TEST_CASE("total scan") {
  SUBCASE("single-atom prior vanishes") {
    const ScalingRun run =
        run_total_scan(single_atom_template(0.5), quick_scan({2, 4}, 2, 20, 5));
    for (const auto* p : run.series("total_q"))
      CHECK(p->estimate == doctest::Approx(0.0));
  }
  SUBCASE("decomposition holds to float precision and the scan decreases") {
    const ScalingRun run = run_total_scan(wigner_template(1, 1.0, 0.5),
                                          quick_scan({2, 4, 8}, 8, 260, 9));
    for (const auto& d : run.decomp) {
      CHECK(d.ok);
      CHECK(std::abs(d.total - d.thermal - d.quenched) <=
            1e-10 * std::max(1.0, std::abs(d.total)));
    }
    CHECK(run.stat("total_q")->decreasing);
    CHECK(run.c_f_hat > 0.0);
    // fluctuation estimates are nonnegative up to noise
    for (const auto& p : run.points) CHECK(p.estimate >= -3.0 * p.se);
  }
  SUBCASE("free-energy variance stays within a factor two") {
    const ScalingRun run = run_total_scan(wigner_template(1, 1.0, 0.5),
                                          quick_scan({2, 4, 8}, 8, 600, 11));
    CHECK(run.c_f_stable);
  }
}

TEST_CASE("l scan") {
  SUBCASE("single-atom prior: thermal part vanishes identically") {
    const ScalingRun run =
        run_l_scan(single_atom_template(0.5), quick_scan({2, 4}, 2, 20, 5));
    for (const auto* p : run.series("thermal_l"))
      CHECK(p->estimate == doctest::Approx(0.0));
  }
  SUBCASE("thermal slope at least as steep as -0.5, quenched decreasing") {
    const ScalingRun run = run_l_scan(wigner_template(1, 1.0, 0.5),
                                      quick_scan({2, 4, 8}, 8, 260, 13));
    CHECK(run.stat("thermal_l")->decreasing_3se);
    CHECK(run.stat("thermal_l")->slope <= -0.5);
    CHECK(run.stat("quenched_l")->decreasing);
    for (const auto& d : run.decomp) CHECK(d.ok);
  }
}

TEST_CASE("free-energy gap against the closed-form bound") {
  const ModelTemplate t = wigner_template(1, 1.0, 0.5);
  McConfig mc;
  mc.draws_disorder = 1200;
  mc.seed = 17;
  mc.jobs = 2;
  const BoundCheck bc = check_free_energy_gap(t, 3, mc);
  CHECK(bc.bound == doctest::Approx(1.0 * 3.0 * 1.0 * 0.5));  // S^2 (2K+1) K^2 s
  CHECK(bc.pass);
}

TEST_CASE("tables are independent of the job count") {
  const ModelTemplate t = wigner_template(1, 1.0, 0.5);
  McConfig mc;
  mc.draws_lambda = 3;
  mc.draws_disorder = 40;
  mc.sample_lambda = true;
  mc.seed = 23;
  auto kernel = [](const DrawContext& ctx, std::span<double> row) {
    row[0] = -ctx.posterior.log_z();
    row[1] = ctx.posterior.mean()(0, 0);
  };
  mc.jobs = 1;
  const Eigen::MatrixXd a = mc_table(t, 3, mc, 2, kernel);
  mc.jobs = 3;
  const Eigen::MatrixXd b = mc_table(t, 3, mc, 2, kernel);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
}
