#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "olab/common.hpp"
#include "olab/rng.hpp"

namespace olab {

// Discrete bounded prior on R^K: A atoms with probabilities, support bound S.
struct PriorSpec {
  Eigen::MatrixXd atoms;    // A x K, one atom per row
  Eigen::VectorXd weights;  // A, nonnegative, sums to 1
  double bound = 1.0;       // S

  int dim() const { return static_cast<int>(atoms.cols()); }
  int num_atoms() const { return static_cast<int>(atoms.rows()); }

  void validate() const;

  // uniform prior on {-1,+1}^K, S = 1
  static PriorSpec rademacher(int K);
  static PriorSpec from_atoms(Eigen::MatrixXd atoms, Eigen::VectorXd weights);
  // degenerate prior: a single atom (zero-fluctuation baseline)
  static PriorSpec single_atom(Eigen::VectorXd atom);

  // exact prior moments, by enumeration over atoms
  Eigen::VectorXd mean() const;            // E[X_1]
  Eigen::MatrixXd second_moment() const;   // E[X_1 X_1^T]
  double mean_sq_norm() const;             // E ||X_1||^2
  double mean_sq_cross() const;            // E [(X_1^T X_2)^2], X_1, X_2 iid
};

enum class ChannelKind { none, spiked_wigner, tensor_p };

// Base observation channel: symmetric order-p rank-K tensor with Gaussian
// noise, signal term snr * n^{(1-p)/2} sum_k prod_j x_{i_j k} over ordered
// index tuples i_1 <= ... <= i_p. spiked_wigner is tensor_p at p = 2.
struct BaseChannelSpec {
  ChannelKind kind = ChannelKind::none;
  int p = 2;
  double snr = 1.0;

  int order() const { return kind == ChannelKind::spiked_wigner ? 2 : p; }
  bool active() const { return kind != ChannelKind::none; }
  void validate() const;

  static BaseChannelSpec none() { return {ChannelKind::none, 2, 0.0}; }
  static BaseChannelSpec spiked_wigner(double snr) {
    return {ChannelKind::spiked_wigner, 2, snr};
  }
  static BaseChannelSpec tensor(int p, double snr) {
    return {ChannelKind::tensor_p, p, snr};
  }
};

// Symmetric SNR matrix in the diagonally dominant ensemble: off-diagonals in
// (s_n, 2 s_n), diagonals in (2K s_n, (2K+1) s_n). Caches the principal
// square root and its entrywise derivatives D_{ll'} solving
//   sqrt * D + D * sqrt = d(lambda)/d(lambda_{ll'}).
struct SnrMatrix {
  int K = 0;
  double s_n = 0.0;
  Eigen::MatrixXd entries;
  Eigen::MatrixXd sqrt;
  std::vector<Eigen::MatrixXd> sqrt_derivs;  // K(K+1)/2, pair_index order

  static int pair_index(int l, int lp, int K);  // l <= lp
  static int num_pairs(int K) { return K * (K + 1) / 2; }

  bool in_ensemble() const;  // interval membership for all free entries
  bool is_zero() const { return entries.isZero(0.0); }

  static SnrMatrix from_entries(Eigen::MatrixXd entries, double s_n,
                                bool with_derivs = true);
  static SnrMatrix zero(int K);
  // deterministic representative: every free entry at its interval midpoint
  static SnrMatrix midpoint(int K, double s_n);
};

SnrMatrix sample_snr_matrix(int K, double s_n, Rng& rng);

// Principal square root of a symmetric PSD matrix (eigenvalues clipped at 0,
// inputs with min eigenvalue < -1e-12 are still accepted and clipped).
Eigen::MatrixXd principal_sqrt(const Eigen::MatrixXd& m);

// Solves sqrt(lambda) * D + D * sqrt(lambda) = d(lambda)/d(lambda_{l,lp}) in
// the eigenbasis of sqrt(lambda). RHS is E_ll' + E_l'l off the diagonal and
// E_ll on it.
Eigen::MatrixXd sqrt_derivative(const SnrMatrix& lambda, int l, int lp);

// Generalized low-rank tensor side channel: Y_I = gamma n^{(1-p)/2}
// lambda_vec^T X_I + Z_I over all I in {1..n}^p, gamma = s_n * beta.
struct GeneralizedPerturbSpec {
  int p = 1;
  Eigen::VectorXd lambda_vec;  // entries in {-1, 0, 1}
  double gamma = 0.0;

  void validate() const;
};

struct ModelSpec {
  PriorSpec prior;
  BaseChannelSpec base;
  SnrMatrix lambda;
  std::optional<GeneralizedPerturbSpec> gen;
  int n = 1;

  int dim() const { return prior.dim(); }
  void validate() const;
};

// Enumeration of nondecreasing index tuples (the base tensor's index set).
std::vector<std::vector<int>> ordered_tuples(int n, int p);
// All tuples in {0..n-1}^p, mixed-radix order (the generalized channel).
std::vector<std::vector<int>> all_tuples(int n, int p);

struct Observations {
  Eigen::VectorXd ytilde;  // base channel, ordered-tuple order
  Eigen::MatrixXd y;       // perturbation channel, n x K
  Eigen::VectorXd ygen;    // generalized channel, all-tuple order (may be empty)
};

struct DisorderSample {
  Eigen::MatrixXd x;       // signal, n x K
  Eigen::VectorXd ztilde;  // base noise
  Eigen::MatrixXd z;       // perturbation noise, n x K
  Eigen::VectorXd zgen;    // generalized-channel noise
  Observations obs;
  std::uint64_t seed = 0;
};

DisorderSample generate_disorder(const ModelSpec& model, std::uint64_t seed);

// Signal term of the base channel for one index tuple.
double base_signal_term(const Eigen::MatrixXd& x, const std::vector<int>& tuple,
                        const BaseChannelSpec& base, int n);
// lambda_vec^T (x_{i_1} o ... o x_{i_p}) for the generalized channel.
double gen_signal_term(const Eigen::MatrixXd& x, const std::vector<int>& tuple,
                       const GeneralizedPerturbSpec& gen);

// Hamiltonian pieces; x-independent constants (1/2 Y^2 data terms) dropped.
double base_energy(const Eigen::MatrixXd& x, const Eigen::VectorXd& ytilde,
                   const BaseChannelSpec& base, int n);
double perturb_energy(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                      const SnrMatrix& lambda);
double gen_energy(const Eigen::MatrixXd& x, const Eigen::VectorXd& ygen,
                  const GeneralizedPerturbSpec& gen, int n);

double total_energy(const Eigen::MatrixXd& x, const DisorderSample& d,
                    const ModelSpec& model);

// Perturbation Hamiltonian in the (X, Z) parametrization,
//   sum_i ( x_i^T lambda x_i / 2 - x_i^T lambda X_i - x_i^T sqrt(lambda) Z_i ),
// identical to perturb_energy evaluated at Y = X sqrt(lambda) + Z. Used by
// derivative oracles where lambda is varied with (X, Z) held fixed.
double perturb_energy_xz(const Eigen::MatrixXd& x, const Eigen::MatrixXd& X,
                         const Eigen::MatrixXd& z, const SnrMatrix& lambda);

// Same for the generalized channel at fixed (X, Z), used to differentiate in
// gamma.
double gen_energy_xz(const Eigen::MatrixXd& x, const Eigen::MatrixXd& X,
                     const Eigen::VectorXd& zgen,
                     const GeneralizedPerturbSpec& gen, int n);

}  // namespace olab
