#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <vector>

#include "olab/common.hpp"

namespace olab {

struct GaussHermite {
  std::vector<double> nodes;    // abscissae for weight e^{-x^2/2}/sqrt(2*pi)
  std::vector<double> weights;  // sum to 1
};

// Golub-Welsch on the Jacobi matrix of the probabilists' Hermite polynomials.
inline GaussHermite gauss_hermite(int m) {
  if (m < 1) throw invalid_parameter("gauss_hermite: m >= 1 required");
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(m, m);
  for (int i = 1; i < m; ++i) {
    const double b = std::sqrt(static_cast<double>(i));
    jacobi(i, i - 1) = b;
    jacobi(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  GaussHermite gh;
  gh.nodes.resize(m);
  gh.weights.resize(m);
  for (int i = 0; i < m; ++i) {
    gh.nodes[i] = es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    gh.weights[i] = v0 * v0;  // mu_0 = 1 for the normalized Gaussian weight
  }
  return gh;
}

}  // namespace olab
