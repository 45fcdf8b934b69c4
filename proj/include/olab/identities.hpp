#pragma once

#include <string>
#include <vector>

#include "olab/experiment.hpp"
#include "olab/observables.hpp"

namespace olab {

// Pass rule: |lhs - rhs| <= max(z_max * se, atol). An se of zero marks an
// algebraically exact evaluation (quadrature/enumeration), judged by atol.
struct IdentityReport {
  std::string name;
  int n = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double se = 0.0;
  double zscore = 0.0;
  bool pass = false;
  std::size_t samples = 0;
  double z_max = 3.0;
  double atol = 1e-8;
};

IdentityReport make_report(std::string name, int n, double lhs, double rhs,
                           double se, std::size_t samples, double z_max,
                           double atol);

// A bounded functional g(Y, x^(1), ..., x^(slots)) of the observations and
// conditionally iid replicas. The exchangeable slot is slot 0.
struct ReplicaFunctional {
  std::string name;
  int slots = 2;
  std::function<double(const Observations&,
                       std::span<const Eigen::MatrixXd* const>)>
      eval;
};

ReplicaFunctional q_entry_functional(int k, int kp);
ReplicaFunctional q_entry_sq_functional(int k, int kp);
ReplicaFunctional gen_overlap_functional(int p, Eigen::VectorXd lambda_vec);

// Signal-exchange check: estimates E<g(Y, x^(1),...)> against
// E<g(Y, X, x^(2),...)> by Monte Carlo over disorder with exact brackets.
IdentityReport check_nishimori(const ModelTemplate& tmpl, int n,
                               const ReplicaFunctional& f, const McConfig& cfg);

// Same check with the quenched average replaced by a fixed Gauss-Hermite grid
// over the observations. Both sides collapse to the same finite sum once the
// posterior is the exact Bayes flip of the sampling weights, so the residual
// is float noise; a wrong Hamiltonian or normalization breaks it.
IdentityReport check_nishimori_exact(const ModelTemplate& tmpl, int n,
                                     const ReplicaFunctional& f, int nodes,
                                     double atol = 1e-8);

// Closed-form suite over f in {Q_{kk'}, Q_{kk'}^2, Q^(2)} from the posterior
// mean and pair moments.
std::vector<IdentityReport> check_nishimori_suite(const ModelTemplate& tmpl,
                                                  int n, const McConfig& cfg);

// E<L_{ll'}> = -E<Q_{ll'}> off the diagonal and -E<Q_{ll}>/2 on it; one
// report per pair l <= l'.
std::vector<IdentityReport> check_l_q_relation(const ModelTemplate& tmpl, int n,
                                               const McConfig& cfg);

// f({x^(a)}_{a=0}^A) tested against the generalized-channel energy
// derivative; slot 0 is the signal.
struct GgFunctional {
  std::string name;
  std::function<double(std::span<const Eigen::MatrixXd* const>)> eval;
};

struct GgReport {
  std::vector<IdentityReport> per_n;  // lhs = residual, rhs = 0
  bool residual_decreasing = false;
};

// Four-term combination
//   (1/A) sum_{a=2}^A E<Q_{1,a} f> - (1/A) E<Q_{0,1}> E<f>
//   - E<Q_{1,A+1} f> + (2/A) E<Q_{0,1} f>
// with Q the generalized overlap of the active channel, at each grid n.
GgReport check_gg_identity(const ModelTemplate& tmpl, std::span<const int> n_grid,
                           const GgFunctional& f, int A, const McConfig& cfg);

// f == 1, A = 1: the combination collapses to E<Q_{0,1}> - E<Q_{1,2}>, zero
// by signal exchange at every n.
GgReport check_gg_nishimori_collapse(const ModelTemplate& tmpl,
                                     std::span<const int> n_grid,
                                     const McConfig& cfg);

// f = Q_{0,1}, A = 1: residual -E<Q_{0,1}>^2 - E<Q_{1,2} Q_{0,1}>
// + 2 E<Q_{0,1}^2>.
GgReport check_gg_overlap(const ModelTemplate& tmpl, std::span<const int> n_grid,
                          const McConfig& cfg);

struct FluctPoint {
  int n = 0;
  double thermal = 0.0, thermal_se = 0.0;    // E<Q^2> - E[<Q>^2]
  double quenched = 0.0, quenched_se = 0.0;  // E[<Q>^2] - (E<Q>)^2
  double total = 0.0, total_se = 0.0;        // E<Q^2> - (E<Q>)^2
  double brace_sum = 0.0, brace_sum_se = 0.0;  // thermal + total
  IdentityReport cross;  // E<Q_{1,2} Q_{0,1}> = E[<Q_{0,1}>^2]
};

struct FluctReport {
  std::vector<FluctPoint> points;
  bool brace_sum_decreasing = false;
};

// Thermal/quenched fluctuation split of the generalized overlap Q_{0,1} and
// the cross identity, on an n grid.
FluctReport check_fluctuation_split(const ModelTemplate& tmpl,
                                    std::span<const int> n_grid,
                                    const McConfig& cfg);

// Gibbs-estimated <Q> against exact enumeration on one disorder realization;
// one report per overlap entry, errors from the chain spread.
struct SamplerCheck {
  std::vector<IdentityReport> reports;
  GibbsDiagnostics diag;
};
SamplerCheck check_sampler(const ModelSpec& model, std::uint64_t disorder_seed,
                           int chains, int sweeps, int burn_in,
                           std::uint64_t chain_seed, double tol_z);

// Scalar error-metric identity E[(1/n)||X - <x>||_F^2] = E||X_1||^2 - Tr E<Q>
// and its matrix counterpart with an O(1/n) slack (2/n is allowed on top of
// the 3 se band).
std::vector<IdentityReport> check_mmse_identities(const ModelTemplate& tmpl,
                                                  int n, const McConfig& cfg);

}  // namespace olab
