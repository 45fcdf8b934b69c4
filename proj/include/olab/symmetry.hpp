#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "olab/common.hpp"
#include "olab/model.hpp"
#include "olab/rng.hpp"

namespace olab {

// Array of replica-pair overlap blocks R_{l,l'} in R^{KxK}, including the
// self-overlap diagonal blocks.
struct ReplicaOverlapArray {
  int n_rep = 0;
  int K = 0;
  std::vector<Eigen::MatrixXd> blocks;  // row-major, l * n_rep + l'
  enum class Source { sampled, synthetic } source = Source::synthetic;

  const Eigen::MatrixXd& block(int l, int lp) const {
    return blocks[static_cast<std::size_t>(l) * n_rep + lp];
  }
  Eigen::MatrixXd& block(int l, int lp) {
    return blocks[static_cast<std::size_t>(l) * n_rep + lp];
  }

  // 2 n_rep x 2 n_rep array for the coordinate pair (k, k'): row block u
  // carries coordinate k, row block w coordinate k'.
  Eigen::MatrixXd coordinate_array(int k, int kp) const;
};

// Tournament orientation: edge l -> l' iff the pair realizes the first option
// of the two-block alternative; ties are recorded and oriented low -> high.
struct TournamentOrientation {
  int n_rep = 0;
  std::vector<std::uint8_t> forward;  // pair (l < l'): 1 iff l -> l'
  std::vector<std::uint8_t> tie;

  static std::size_t pair_slot(int l, int lp, int n);
  bool edge(int from, int to) const;  // true iff from -> to
};

struct OverlapConstants {
  double a = 0.0, d = 0.0;  // diagonal entries R^{kk}, R^{k'k'}
  double x = 0.0, y = 0.0;  // sum and sum of squares of the off-diagonals
  double max_dev = 0.0;     // worst constancy violation observed
};

// Verifies the three overlap choices are constant across l != l' within tol
// and returns the constants; throws not_replica_symmetric otherwise.
OverlapConstants extract_constants(const ReplicaOverlapArray& arr, int k, int kp,
                                   double tol);

// Solves r + q = x, r^2 + q^2 = y; returns {r, q} with r >= q. The
// discriminant 2y - x^2 is clipped at zero within tol and rejected below -tol.
std::pair<double, double> solve_offdiagonal(double x, double y, double tol);

TournamentOrientation orient_tournament(const ReplicaOverlapArray& arr, int k,
                                        int kp, const OverlapConstants& c,
                                        double tol);

struct SubsetPair {
  std::vector<int> v1, v2;
  int m = 0;
  bool exhaustive = false;  // maximum-m certified by full search
};

// Two disjoint m-subsets with every edge oriented V1 -> V2; exhaustive up to
// 12 replicas, greedy beyond.
SubsetPair find_one_directional_subsets(const TournamentOrientation& t,
                                        int m_target);

struct TournamentReport {
  int k = 0, kp = 0;
  OverlapConstants constants;
  double b = 0.0, c = 0.0;  // solved off-diagonal pair, b >= c
  TournamentOrientation orientation;
  SubsetPair subsets;
  double gap_u = 0.0;      // ||U1 - U2||^2
  double gap_w = 0.0;      // ||W1 - W2||^2
  double cross_gap = 0.0;  // |(U1, W2) - (W1, U2)|
  double gap_u_bound = 0.0, gap_w_bound = 0.0;  // 2(L + a)/m, 2(L + d)/m
  double self_overlap_max = 0.0;                // L
  double tol = 0.0;
  bool verdict = false;  // |b - c| <= tol
};

// Gram-embeds the coordinate array (eigenvalue clipping at -tol * spectral
// norm rejects genuinely non-PSD input), forms subset barycentres, and checks
// the norm bounds and the cross inner-product gap.
TournamentReport certify_b_equals_c(const ReplicaOverlapArray& arr, int k,
                                    int kp, const TournamentReport& partial);

// Full pipeline: constants -> solve -> orient -> subsets -> certify.
// constancy_tol governs only the constant-extraction step (sampled arrays
// carry Monte Carlo wobble); tol drives ties and the b = c verdict.
TournamentReport run_symmetry_pipeline(const ReplicaOverlapArray& arr, int k,
                                       int kp, double tol, int m_target,
                                       double constancy_tol = -1.0);

// --- synthetic generators ---

// Every block (diagonal included) equal to [[a, b], [b, d]]; PSD whenever the
// 2x2 block is. The b = c baseline with exactly coincident Gram vectors.
ReplicaOverlapArray constant_block_array(int n_rep, double a, double b, double d);

// Exact two-option pattern: off-diagonal blocks [[a,b],[c,d]] or
// [[a,c],[b,d]] per the given orientation; diagonal blocks
// [[diag_u, e],[e, diag_w]]. Not PSD in general; for round-trip tests.
ReplicaOverlapArray exact_block_array(int n_rep, double a, double b, double c,
                                      double d, double diag_u, double diag_w,
                                      double e,
                                      const TournamentOrientation& orient);

// Explicit Gram construction with a planted asymmetry b - c =
// 2 * alpha * gamma / sqrt(n_rep - 1) that shrinks as the array grows; PSD by
// construction, d-entries constant up to O(gamma^2).
ReplicaOverlapArray gram_planted_array(int n_rep, double a_base, double d_base,
                                       double cross, double alpha, double beta,
                                       double gamma,
                                       const TournamentOrientation& orient);

TournamentOrientation transitive_orientation(int n_rep);
TournamentOrientation random_orientation(int n_rep, Rng& rng);

// Overlap array from posterior replicas (pairwise Gram blocks x^T x' / n).
ReplicaOverlapArray sampled_overlap_array(const std::vector<Eigen::MatrixXd>& replicas);

}  // namespace olab
