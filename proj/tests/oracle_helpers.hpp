// Test-only oracles: finite differences, brute-force reference sums and
// quadrature helpers. Kept independent of the library code paths they check.
#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "olab/model.hpp"
#include "olab/quadrature.hpp"

namespace oracle {

// central difference of the side-channel Hamiltonian in one symmetric entry,
// at fixed signal and noise
inline double fd_perturb_energy(const Eigen::MatrixXd& x, const Eigen::MatrixXd& X,
                                const Eigen::MatrixXd& z,
                                const olab::SnrMatrix& lambda, int l, int lp,
                                double eps) {
  Eigen::MatrixXd up = lambda.entries, dn = lambda.entries;
  up(l, lp) += eps;
  dn(l, lp) -= eps;
  if (l != lp) {
    up(lp, l) += eps;
    dn(lp, l) -= eps;
  }
  const olab::SnrMatrix lam_up = olab::SnrMatrix::from_entries(up, lambda.s_n, false);
  const olab::SnrMatrix lam_dn = olab::SnrMatrix::from_entries(dn, lambda.s_n, false);
  return (olab::perturb_energy_xz(x, X, z, lam_up) -
          olab::perturb_energy_xz(x, X, z, lam_dn)) /
         (2.0 * eps);
}

// central difference of the generalized-channel Hamiltonian in gamma
inline double fd_gen_energy(const Eigen::MatrixXd& x, const Eigen::MatrixXd& X,
                            const Eigen::VectorXd& zgen,
                            const olab::GeneralizedPerturbSpec& gen, int n,
                            double eps) {
  olab::GeneralizedPerturbSpec up = gen, dn = gen;
  up.gamma += eps;
  dn.gamma -= eps;
  return (olab::gen_energy_xz(x, X, zgen, up, n) -
          olab::gen_energy_xz(x, X, zgen, dn, n)) /
         (2.0 * eps);
}

// brute-force overlap entry
inline double overlap_entry(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                            int k, int kp) {
  double acc = 0.0;
  for (int i = 0; i < a.rows(); ++i) acc += a(i, k) * b(i, kp);
  return acc / a.rows();
}

// Gauss-Hermite expectation of f under N(0,1)
inline double gh_expect(const std::function<double(double)>& f, int nodes) {
  const olab::GaussHermite gh = olab::gauss_hermite(nodes);
  double acc = 0.0;
  for (int i = 0; i < nodes; ++i) acc += gh.weights[i] * f(gh.nodes[i]);
  return acc;
}

}  // namespace oracle
