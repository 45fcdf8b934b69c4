#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "olab/model.hpp"
#include "olab/rng.hpp"

namespace olab {

inline constexpr std::size_t kEnumerationBudget = std::size_t{1} << 24;
inline constexpr std::size_t kConfigCacheCap = std::size_t{1} << 16;

// Exact posterior over the A^n atom configurations. Weights are proportional
// to prior(x) * exp(-total_energy(x)); log_z is the log normalizer of those
// weights (x-independent energy constants dropped throughout).
class ExactPosterior {
 public:
  ExactPosterior(const ModelSpec& model, const Observations& obs,
                 std::size_t budget = kEnumerationBudget);

  int n() const { return n_; }
  int dim() const { return K_; }
  int num_atoms() const { return A_; }
  std::size_t count() const { return count_; }
  double log_z() const { return log_z_; }

  const std::vector<double>& weights() const { return w_; }
  // configuration c as an n x K matrix (cached; throws when above cache cap)
  const Eigen::MatrixXd& config(std::size_t c) const;

  const Eigen::MatrixXd& mean() const { return mean_; }          // <x>, n x K
  // <x_{ik} x_{jk'}> indexed by (i*K+k, j*K+k'); computed on first use
  const Eigen::MatrixXd& pair_moments() const;
  // P(x_i = atom_a), n x A
  const Eigen::MatrixXd& site_marginals() const { return site_marg_; }

  using Functional =
      std::function<double(std::span<const Eigen::MatrixXd* const>)>;

  // <f(x^(1),...,x^(R))> over conditionally iid replicas, with optional fixed
  // leading slots (e.g. the signal). Cost count^R.
  double bracket(int free_slots, const Functional& f,
                 std::span<const Eigen::MatrixXd* const> fixed = {}) const;
  double bracket1(const std::function<double(const Eigen::MatrixXd&)>& f) const;

 private:
  int n_ = 0, K_ = 0, A_ = 0;
  std::size_t count_ = 0;
  bool cached_ = false;
  double log_z_ = 0.0;
  std::vector<double> w_;
  std::vector<Eigen::MatrixXd> configs_;
  Eigen::MatrixXd mean_;
  Eigen::MatrixXd site_marg_;
  mutable Eigen::MatrixXd chi_;  // lazy; instances are used single-threaded
  mutable bool chi_ready_ = false;
};

struct GibbsDiagnostics {
  int chains = 0;
  int sweeps = 0;
  int burn_in = 0;
  double rhat = 1.0;
  bool mixing_warning = false;
};

// Posterior samples: exact mode carries the full enumeration, mcmc mode one
// replica per independently seeded chain (never a single thinned chain).
struct ReplicaBatch {
  enum class Mode { exact, mcmc };
  Mode mode = Mode::exact;
  std::shared_ptr<const ExactPosterior> exact;
  std::vector<Eigen::MatrixXd> replicas;
  GibbsDiagnostics diag;

  // Monte Carlo bracket of an A-replica functional from disjoint chain
  // groups; returns per-group samples for the caller to summarize.
  std::vector<double> mc_bracket_samples(int arity,
                                         const ExactPosterior::Functional& f) const;
};

ReplicaBatch enumerate_posterior(const ModelSpec& model, const DisorderSample& d,
                                 std::size_t budget = kEnumerationBudget);

// Single-site heat-bath updates with exact conditional weights over the atoms.
ReplicaBatch gibbs_sample(const ModelSpec& model, const DisorderSample& d,
                          int chains, int sweeps, int burn_in,
                          std::uint64_t seed);

struct FreeEnergySample {
  double value = 0.0;  // -(1/n) log Z
  int n = 0;
  std::uint64_t seed = 0;
};

FreeEnergySample free_energy(const ModelSpec& model, const DisorderSample& d,
                             std::size_t budget = kEnumerationBudget);

}  // namespace olab
