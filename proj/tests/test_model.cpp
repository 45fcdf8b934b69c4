#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "olab/model.hpp"
#include "oracle_helpers.hpp"

using namespace olab;

TEST_CASE("prior: rademacher moments and validation") {
  const PriorSpec p1 = PriorSpec::rademacher(1);
  CHECK(p1.num_atoms() == 2);
  CHECK(p1.mean().cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  CHECK(p1.mean_sq_norm() == doctest::Approx(1.0));

  const PriorSpec p2 = PriorSpec::rademacher(2);
  CHECK(p2.num_atoms() == 4);
  CHECK(p2.mean_sq_norm() == doctest::Approx(2.0));
  // X1 . X2 is -2, 0, 2 with probability 1/4, 1/2, 1/4
  CHECK(p2.mean_sq_cross() == doctest::Approx(2.0));

  Eigen::MatrixXd atoms(2, 1);
  atoms << 1.0, -1.0;
  Eigen::VectorXd bad_w(2);
  bad_w << 0.7, 0.2;
  CHECK_THROWS_AS(PriorSpec::from_atoms(atoms, bad_w), invalid_parameter);
}

TEST_CASE("snr matrix: ensemble intervals") {
  Rng rng(1);
  SUBCASE("K=1, s=0.5 puts the single entry in (1.0, 1.5)") {
    for (int t = 0; t < 50; ++t) {
      const SnrMatrix m = sample_snr_matrix(1, 0.5, rng);
      CHECK(m.entries(0, 0) > 1.0);
      CHECK(m.entries(0, 0) < 1.5);
      CHECK(m.in_ensemble());
    }
  }
  SUBCASE("K=2, s=0.1: off-diagonal in (0.1,0.2), diagonal in (0.4,0.5), SPD") {
    for (int t = 0; t < 50; ++t) {
      const SnrMatrix m = sample_snr_matrix(2, 0.1, rng);
      CHECK(m.entries(0, 1) == m.entries(1, 0));
      CHECK(m.entries(0, 1) > 0.1);
      CHECK(m.entries(0, 1) < 0.2);
      for (int l = 0; l < 2; ++l) {
        CHECK(m.entries(l, l) > 0.4);
        CHECK(m.entries(l, l) < 0.5);
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.entries);
      CHECK(es.eigenvalues().minCoeff() > 0.0);
    }
  }
  SUBCASE("K=3, s=0.05, seed=7: eigenvalues all positive") {
    Rng r7(7);
    const SnrMatrix m = sample_snr_matrix(3, 0.05, r7);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.entries);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
  }
  SUBCASE("invalid scale rejected") {
    CHECK_THROWS_AS(sample_snr_matrix(2, 0.0, rng), invalid_parameter);
    CHECK_THROWS_AS(sample_snr_matrix(2, -0.1, rng), invalid_parameter);
  }
}

TEST_CASE("principal square root") {
  SUBCASE("identity and diagonal") {
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(3, 3);
    CHECK((principal_sqrt(eye) - eye).cwiseAbs().maxCoeff() < 1e-14);
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
    d(0, 0) = 4.0;
    d(1, 1) = 9.0;
    const Eigen::MatrixXd r = principal_sqrt(d);
    CHECK(r(0, 0) == doctest::Approx(2.0));
    CHECK(r(1, 1) == doctest::Approx(3.0));
    CHECK(std::abs(r(0, 1)) < 1e-14);
  }
  SUBCASE("multiply-back on ensemble members") {
    Rng rng(3);
    for (int t = 0; t < 20; ++t) {
      const SnrMatrix m = sample_snr_matrix(3, 0.3, rng);
      const double res = (m.sqrt * m.sqrt - m.entries).norm();
      CHECK(res <= 1e-10 * std::max(1.0, m.entries.norm()));
    }
  }
  SUBCASE("asymmetric input rejected") {
    Eigen::MatrixXd bad(2, 2);
    bad << 1.0, 0.5, 0.1, 1.0;
    CHECK_THROWS_AS(principal_sqrt(bad), invalid_parameter);
  }
}

TEST_CASE("square-root derivatives") {
  SUBCASE("K=1 closed form 1/(2 sqrt(s))") {
    Eigen::MatrixXd e(1, 1);
    e << 1.21;
    const SnrMatrix m = SnrMatrix::from_entries(e, 0.5);
    CHECK(m.sqrt_derivs[0](0, 0) == doctest::Approx(1.0 / (2.0 * 1.1)));
  }
  SUBCASE("sylvester residual of every cached derivative") {
    Rng rng(11);
    const SnrMatrix m = sample_snr_matrix(3, 0.4, rng);
    for (int l = 0; l < 3; ++l)
      for (int lp = l; lp < 3; ++lp) {
        Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(3, 3);
        if (l == lp) {
          rhs(l, l) = 1.0;
        } else {
          rhs(l, lp) = rhs(lp, l) = 1.0;
        }
        const Eigen::MatrixXd& d = m.sqrt_derivs[SnrMatrix::pair_index(l, lp, 3)];
        CHECK((m.sqrt * d + d * m.sqrt - rhs).norm() <= 1e-8);
        CHECK((d - d.transpose()).cwiseAbs().maxCoeff() < 1e-12);
      }
  }
  SUBCASE("finite-difference cross-check, K=2") {
    Rng rng(5);
    const SnrMatrix m = sample_snr_matrix(2, 0.5, rng);
    const double eps = 1e-6;
    for (int l = 0; l < 2; ++l)
      for (int lp = l; lp < 2; ++lp) {
        Eigen::MatrixXd up = m.entries, dn = m.entries;
        up(l, lp) += eps;
        dn(l, lp) -= eps;
        if (l != lp) {
          up(lp, l) += eps;
          dn(lp, l) -= eps;
        }
        const Eigen::MatrixXd fd =
            (principal_sqrt(up) - principal_sqrt(dn)) / (2.0 * eps);
        const Eigen::MatrixXd& d = m.sqrt_derivs[SnrMatrix::pair_index(l, lp, 2)];
        CHECK((fd - d).norm() / d.norm() <= 1e-4);
      }
  }
  SUBCASE("singular matrix rejected") {
    const SnrMatrix z = SnrMatrix::zero(2);
    CHECK_THROWS_AS(sqrt_derivative(z, 0, 0), numerical_failure);
  }
}

namespace {

ModelSpec wigner_model(int n, int K, double snr, double s_n) {
  ModelSpec m;
  m.prior = PriorSpec::rademacher(K);
  m.base = BaseChannelSpec::spiked_wigner(snr);
  m.lambda = SnrMatrix::midpoint(K, s_n);
  m.n = n;
  return m;
}

}  // namespace

TEST_CASE("disorder generation") {
  SUBCASE("zero snr matrix: Y equals the noise exactly") {
    ModelSpec m;
    m.prior = PriorSpec::rademacher(1);
    m.base = BaseChannelSpec::none();
    m.lambda = SnrMatrix::zero(1);
    m.n = 5;
    const DisorderSample d = generate_disorder(m, 42);
    CHECK((d.obs.y - d.z).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("n=2 spiked wigner observation formula") {
    const ModelSpec m = wigner_model(2, 1, 1.0, 0.5);
    const DisorderSample d = generate_disorder(m, 9);
    // ordered pairs: (0,0), (0,1), (1,1); off-diagonal carries X1 X2 / sqrt(2)
    const double expected = d.x(0, 0) * d.x(1, 0) / std::sqrt(2.0) + d.ztilde(1);
    CHECK(d.obs.ytilde(1) == doctest::Approx(expected).epsilon(1e-14));
  }
  SUBCASE("same seed reproduces the sample bit for bit") {
    const ModelSpec m = wigner_model(4, 2, 1.0, 0.5);
    const DisorderSample a = generate_disorder(m, 1234);
    const DisorderSample b = generate_disorder(m, 1234);
    CHECK((a.x - b.x).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.z - b.z).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.ztilde - b.ztilde).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.obs.y - b.obs.y).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.obs.ytilde - b.obs.ytilde).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("ordered tuple counts") {
    CHECK(ordered_tuples(4, 2).size() == 10);  // n(n+1)/2
    CHECK(ordered_tuples(3, 3).size() == 10);  // C(n+p-1, p)
    CHECK(all_tuples(3, 2).size() == 9);
  }
}

TEST_CASE("total energy") {
  SUBCASE("no channels: identically zero") {
    ModelSpec m;
    m.prior = PriorSpec::rademacher(1);
    m.base = BaseChannelSpec::none();
    m.lambda = SnrMatrix::zero(1);
    m.n = 3;
    const DisorderSample d = generate_disorder(m, 5);
    Eigen::MatrixXd x(3, 1);
    for (int bits = 0; bits < 8; ++bits) {
      for (int i = 0; i < 3; ++i) x(i, 0) = (bits >> i) & 1 ? 1.0 : -1.0;
      CHECK(total_energy(x, d, m) == 0.0);
    }
  }
  SUBCASE("noiseless signal is the exhaustive energy minimum") {
    const ModelSpec m = wigner_model(2, 1, 1.0, 0.5);
    DisorderSample d;
    d.x.resize(2, 1);
    d.x << 1.0, -1.0;
    d.ztilde = Eigen::VectorXd::Zero(3);
    d.z = Eigen::MatrixXd::Zero(2, 1);
    const auto tuples = ordered_tuples(2, 2);
    d.obs.ytilde.resize(3);
    for (int t = 0; t < 3; ++t)
      d.obs.ytilde(t) = base_signal_term(d.x, tuples[t], m.base, 2);
    d.obs.y = d.x * m.lambda.sqrt;
    const double e_signal = total_energy(d.x, d, m);
    Eigen::MatrixXd x(2, 1);
    for (int bits = 0; bits < 4; ++bits) {
      for (int i = 0; i < 2; ++i) x(i, 0) = (bits >> i) & 1 ? 1.0 : -1.0;
      CHECK(total_energy(x, d, m) >= e_signal - 1e-12);
    }
  }
  SUBCASE("side-channel energy matches the expanded K=1 formula") {
    const ModelSpec m = wigner_model(4, 1, 0.0, 0.5);
    const DisorderSample d = generate_disorder(m, 77);
    const double lam = m.lambda.entries(0, 0);
    Eigen::MatrixXd x(4, 1);
    x << 1, -1, -1, 1;
    double direct = 0.0;
    for (int i = 0; i < 4; ++i)
      direct += 0.5 * lam * x(i, 0) * x(i, 0) - lam * x(i, 0) * d.x(i, 0) -
                std::sqrt(lam) * x(i, 0) * d.z(i, 0);
    CHECK(perturb_energy(x, d.obs.y, m.lambda) == doctest::Approx(direct).epsilon(1e-12));
    CHECK(perturb_energy_xz(x, d.x, d.z, m.lambda) ==
          doctest::Approx(direct).epsilon(1e-12));
  }
  SUBCASE("energy differences invariant under the dropped data constant") {
    const ModelSpec m = wigner_model(3, 1, 1.3, 0.5);
    const DisorderSample d = generate_disorder(m, 21);
    // second route: full Gaussian negative log-likelihood of the base channel
    auto exact_nll = [&](const Eigen::MatrixXd& x) {
      const auto tuples = ordered_tuples(3, 2);
      double h = 0.0;
      for (std::size_t t = 0; t < tuples.size(); ++t) {
        const double mean = base_signal_term(x, tuples[t], m.base, 3);
        const double r = d.obs.ytilde(static_cast<int>(t)) - mean;
        h += 0.5 * r * r;
      }
      return h + perturb_energy(x, d.obs.y, m.lambda);
    };
    Eigen::MatrixXd xa(3, 1), xb(3, 1);
    xa << 1, 1, -1;
    xb << -1, 1, 1;
    const double diff_dropped = total_energy(xa, d, m) - total_energy(xb, d, m);
    const double diff_exact = exact_nll(xa) - exact_nll(xb);
    CHECK(diff_dropped == doctest::Approx(diff_exact).epsilon(1e-10));
  }
  SUBCASE("dimension mismatch rejected") {
    const ModelSpec m = wigner_model(3, 1, 1.0, 0.5);
    const DisorderSample d = generate_disorder(m, 2);
    Eigen::MatrixXd x(2, 1);
    x << 1, -1;
    CHECK_THROWS_AS(total_energy(x, d, m), invalid_parameter);
  }
}

TEST_CASE("generalized channel energy and derivative connection") {
  ModelSpec m;
  m.prior = PriorSpec::rademacher(1);
  m.base = BaseChannelSpec::none();
  m.lambda = SnrMatrix::zero(1);
  m.n = 3;
  GeneralizedPerturbSpec g;
  g.p = 2;
  g.lambda_vec = Eigen::VectorXd::Ones(1);
  g.gamma = 0.8;
  m.gen = g;
  const DisorderSample d = generate_disorder(m, 10);
  Eigen::MatrixXd x(3, 1);
  x << -1, 1, 1;
  // observation form equals the (X, Z) expanded form
  CHECK(gen_energy(x, d.obs.ygen, *m.gen, 3) ==
        doctest::Approx(gen_energy_xz(x, d.x, d.zgen, *m.gen, 3)).epsilon(1e-12));
}
