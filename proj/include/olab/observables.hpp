#pragma once

#include <Eigen/Dense>

#include "olab/model.hpp"
#include "olab/posterior.hpp"

namespace olab {

// Overlap between two n x K configurations: a^T b / n.
Eigen::MatrixXd overlap(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

// Scalar generalized overlap lambda^T (a^T b / n)^{o p} lambda where ^{o p}
// is the entrywise p-th power.
double generalized_overlap(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                           int p, const Eigen::VectorXd& lambda_vec);
double generalized_overlap_from_r(const Eigen::MatrixXd& r, int p,
                                  const Eigen::VectorXd& lambda_vec);

// Per-configuration gradient of the side-channel Hamiltonian in the SNR
// matrix entries, divided by n:
//   off-diagonal: (1/n) sum_i ( x_il x_il' - x_il X_il' - x_il' X_il
//                               - x_i^T D_{ll'} Z_i )
//   diagonal:     (1/n) sum_i ( x_il^2 / 2 - x_il X_il - x_i^T D_{ll} Z_i )
// with D_{ll'} the cached square-root derivatives.
Eigen::MatrixXd l_matrix(const Eigen::MatrixXd& x, const DisorderSample& d,
                         const SnrMatrix& lambda);

// (1/n) d/d(gamma) of the generalized-channel Hamiltonian at fixed (X, Z):
//   gamma Q_{1,1} - 2 gamma Q_{0,1} - n^{-(1+p)/2} sum_I Z_I x_I^T lambda.
double l_generalized(const Eigen::MatrixXd& x, const DisorderSample& d,
                     const GeneralizedPerturbSpec& gen);

// Per-disorder error-metric contributions (caller averages over disorder):
//   mmse:        (1/n)   ||X - <x>||_F^2
//   mmse_matrix: (1/n)   (X - <x>)^T (X - <x>)
//   matrix_mmse: (1/n^2) sum_ij ( X_i^T X_j - <x_i^T x_j> )^2
// The subset-sum error over coordinates S follows from the averaged overlap:
// sum the entries of E[X_1 X_1^T] - E<Q> over (k, k') in S x S.
struct MmseSample {
  double mmse = 0.0;
  Eigen::MatrixXd mmse_matrix;
  double matrix_mmse = 0.0;
};

MmseSample mmse_metrics(const ExactPosterior& post, const DisorderSample& d);
MmseSample mmse_metrics(const ReplicaBatch& batch, const DisorderSample& d);

// Exact-bracket moments used by the identity and scan kernels. All follow
// from the posterior mean and pair moments.
struct BracketMoments {
  Eigen::MatrixXd q_mean;      // <Q>, K x K, Q = X^T x / n
  Eigen::MatrixXd q12_mean;    // <Q^(12)> = X-free replica product mean
  Eigen::MatrixXd q_sq;        // <Q_{kk'}^2> entrywise
  Eigen::MatrixXd q12_sq;      // <(Q^(12)_{kk'})^2> entrywise
  double thermal_q = 0.0;      // <||Q - <Q>||_F^2>
  double gap_q12 = 0.0;        // <||Q - <Q^(12)>||_F^2>
};

BracketMoments bracket_moments(const ExactPosterior& post, const Eigen::MatrixXd& X);

// <L>, <||L - <L>||_F^2> by direct weighted sums over the enumeration.
struct LBrackets {
  Eigen::MatrixXd mean;      // <L>
  double thermal = 0.0;      // <||L - <L>||_F^2>
  double meansq_sum = 0.0;   // sum_{ll'} <L_{ll'}^2>
};

LBrackets l_brackets(const ExactPosterior& post, const DisorderSample& d,
                     const SnrMatrix& lambda);

// Brackets of the scalar projected overlaps q_{a,b} = u_a^T u_b / n with
// u = x lambda_vec (the p = 1 generalized overlap system). Slot 0 is the
// signal.
struct ProjectedMoments {
  double q01 = 0.0;      // <q_{0,1}>
  double q01_sq = 0.0;   // <q_{0,1}^2>
  double q12 = 0.0;      // <q_{1,2}>
  double q12_sq = 0.0;   // <q_{1,2}^2>
  double q12_q01 = 0.0;  // <q_{1,2} q_{0,1}>
  double q01_mean_sq = 0.0;  // <q_{0,1}>^2 (thermal-mean square)
};

ProjectedMoments projected_moments(const ExactPosterior& post,
                                   const Eigen::MatrixXd& X,
                                   const Eigen::VectorXd& lambda_vec);

}  // namespace olab
