#include "olab/posterior.hpp"

#include <cmath>

#include "olab/stats.hpp"

namespace olab {

namespace {

std::size_t pow_count(int A, int n, std::size_t budget) {
  std::size_t c = 1;
  for (int i = 0; i < n; ++i) {
    if (c > budget / static_cast<std::size_t>(A))
      throw resource_limit("enumeration budget exceeded; use gibbs_sample");
    c *= static_cast<std::size_t>(A);
  }
  return c;
}

}  // namespace

ExactPosterior::ExactPosterior(const ModelSpec& model, const Observations& obs,
                               std::size_t budget) {
  model.validate();
  n_ = model.n;
  K_ = model.dim();
  A_ = model.prior.num_atoms();
  count_ = pow_count(A_, n_, budget);
  cached_ = count_ <= kConfigCacheCap;

  std::vector<double> log_prior(A_);
  for (int a = 0; a < A_; ++a)
    log_prior[a] = model.prior.weights(a) > 0.0
                       ? std::log(model.prior.weights(a))
                       : -1e300;

  DisorderSample shim;  // total_energy reads only the observations
  shim.obs = obs;

  auto advance = [&](std::vector<int>& digits) {
    for (int i = 0; i < n_; ++i) {
      if (++digits[i] < A_) return;
      digits[i] = 0;
    }
  };

  if (cached_) configs_.resize(count_);
  w_.resize(count_);  // holds log weights first, probabilities after
  std::vector<int> digits(n_, 0);
  Eigen::MatrixXd x(n_, K_);
  double mx = -1e300;
  for (std::size_t c = 0; c < count_; ++c) {
    double lp = 0.0;
    for (int i = 0; i < n_; ++i) {
      x.row(i) = model.prior.atoms.row(digits[i]);
      lp += log_prior[digits[i]];
    }
    if (cached_) configs_[c] = x;
    w_[c] = lp - total_energy(x, shim, model);
    mx = std::max(mx, w_[c]);
    advance(digits);
  }

  double zsum = 0.0;
  for (std::size_t c = 0; c < count_; ++c) zsum += std::exp(w_[c] - mx);
  log_z_ = mx + std::log(zsum);

  mean_ = Eigen::MatrixXd::Zero(n_, K_);
  site_marg_ = Eigen::MatrixXd::Zero(n_, A_);
  std::fill(digits.begin(), digits.end(), 0);
  for (std::size_t c = 0; c < count_; ++c) {
    w_[c] = std::exp(w_[c] - log_z_);
    for (int i = 0; i < n_; ++i) {
      site_marg_(i, digits[i]) += w_[c];
      mean_.row(i) += w_[c] * model.prior.atoms.row(digits[i]);
    }
    advance(digits);
  }
}

const Eigen::MatrixXd& ExactPosterior::config(std::size_t c) const {
  if (!cached_)
    throw resource_limit("config access above cache cap; use gibbs_sample");
  return configs_[c];
}

const Eigen::MatrixXd& ExactPosterior::pair_moments() const {
  if (!chi_ready_) {
    if (!cached_)
      throw resource_limit("pair moments above cache cap; use gibbs_sample");
    const int d = n_ * K_;
    chi_ = Eigen::MatrixXd::Zero(d, d);
    Eigen::VectorXd v(d);
    for (std::size_t c = 0; c < count_; ++c) {
      for (int i = 0; i < n_; ++i)
        for (int k = 0; k < K_; ++k) v(i * K_ + k) = configs_[c](i, k);
      chi_.selfadjointView<Eigen::Lower>().rankUpdate(v, w_[c]);
    }
    chi_ = chi_.selfadjointView<Eigen::Lower>();
    chi_ready_ = true;
  }
  return chi_;
}

double ExactPosterior::bracket(int free_slots, const Functional& f,
                               std::span<const Eigen::MatrixXd* const> fixed) const {
  if (free_slots < 0) throw invalid_parameter("bracket: free_slots >= 0");
  double budget_check = 1.0;
  for (int r = 0; r < free_slots; ++r) budget_check *= static_cast<double>(count_);
  if (budget_check > 4e8) throw resource_limit("bracket: replica tuple budget exceeded");
  if (!cached_ && free_slots > 0)
    throw resource_limit("bracket above cache cap; use gibbs_sample");

  std::vector<const Eigen::MatrixXd*> slots(fixed.begin(), fixed.end());
  const std::size_t base = slots.size();
  slots.resize(base + free_slots);
  std::vector<std::size_t> idx(free_slots, 0);
  double acc = 0.0;
  while (true) {
    double w = 1.0;
    for (int r = 0; r < free_slots; ++r) {
      w *= w_[idx[r]];
      slots[base + r] = &configs_[idx[r]];
    }
    acc += w * f(std::span<const Eigen::MatrixXd* const>(slots.data(), slots.size()));
    int r = 0;
    for (; r < free_slots; ++r) {
      if (++idx[r] < count_) break;
      idx[r] = 0;
    }
    if (r == free_slots) break;
  }
  return acc;
}

double ExactPosterior::bracket1(
    const std::function<double(const Eigen::MatrixXd&)>& f) const {
  if (!cached_) throw resource_limit("bracket above cache cap; use gibbs_sample");
  double acc = 0.0;
  for (std::size_t c = 0; c < count_; ++c) acc += w_[c] * f(configs_[c]);
  return acc;
}

ReplicaBatch enumerate_posterior(const ModelSpec& model, const DisorderSample& d,
                                 std::size_t budget) {
  ReplicaBatch batch;
  batch.mode = ReplicaBatch::Mode::exact;
  batch.exact = std::make_shared<ExactPosterior>(model, d.obs, budget);
  return batch;
}

namespace {

// Heat-bath machinery: per-site candidate energies from the terms of the
// Hamiltonian that touch the site.
class SiteSampler {
 public:
  SiteSampler(const ModelSpec& model, const DisorderSample& d)
      : model_(model), d_(d), n_(model.n), K_(model.dim()),
        A_(model.prior.num_atoms()) {
    // side channel: 1/2 a^T lambda a - a . (sqrt(lambda) Y_i)
    pert_table_.resize(n_, A_);
    const Eigen::MatrixXd v = d.obs.y * model.lambda.sqrt;
    for (int a = 0; a < A_; ++a) {
      const Eigen::VectorXd atom = model.prior.atoms.row(a).transpose();
      const double quad = 0.5 * atom.dot(model.lambda.entries * atom);
      for (int i = 0; i < n_; ++i)
        pert_table_(i, a) = quad - atom.dot(v.row(i).transpose());
    }
    if (model.base.active()) {
      base_tuples_ = ordered_tuples(n_, model.base.order());
      site_base_.resize(n_);
      for (std::size_t t = 0; t < base_tuples_.size(); ++t)
        for (int j : base_tuples_[t])
          if (site_base_[j].empty() || site_base_[j].back() != t)
            site_base_[j].push_back(t);
    }
    if (model.gen) {
      gen_tuples_ = all_tuples(n_, model.gen->p);
      gen_scale_ = model.gen->gamma *
                   std::pow(static_cast<double>(n_), (1.0 - model.gen->p) / 2.0);
      site_gen_.resize(n_);
      for (std::size_t t = 0; t < gen_tuples_.size(); ++t)
        for (int j : gen_tuples_[t])
          if (site_gen_[j].empty() || site_gen_[j].back() != t)
            site_gen_[j].push_back(t);
    }
  }

  // heat-bath update of site i in place
  void update_site(Eigen::MatrixXd& x, int i, Rng& rng) const {
    std::vector<double> wts(A_);
    double emin = 1e300;
    std::vector<double> energy(A_);
    for (int a = 0; a < A_; ++a) {
      energy[a] = local_energy(x, i, a);
      emin = std::min(emin, energy[a]);
    }
    for (int a = 0; a < A_; ++a)
      wts[a] = model_.prior.weights(a) * std::exp(-(energy[a] - emin));
    const int a = rng.categorical(wts);
    x.row(i) = model_.prior.atoms.row(a);
  }

 private:
  double local_energy(const Eigen::MatrixXd& x, int i, int a) const {
    double h = pert_table_(i, a);
    const Eigen::RowVectorXd atom = model_.prior.atoms.row(a);
    if (model_.base.active()) {
      const int p = model_.base.order();
      const double scale =
          model_.base.snr * std::pow(static_cast<double>(n_), (1.0 - p) / 2.0);
      for (std::size_t t : site_base_[i]) {
        const auto& tup = base_tuples_[t];
        double m = 0.0;
        for (int k = 0; k < K_; ++k) {
          double prod = 1.0;
          for (int j : tup) prod *= (j == i) ? atom(k) : x(j, k);
          m += prod;
        }
        m *= scale;
        h += 0.5 * m * m - d_.obs.ytilde(static_cast<int>(t)) * m;
      }
    }
    if (model_.gen) {
      const auto& gen = *model_.gen;
      for (std::size_t t : site_gen_[i]) {
        const auto& tup = gen_tuples_[t];
        double s = 0.0;
        for (int k = 0; k < K_; ++k) {
          if (gen.lambda_vec(k) == 0.0) continue;
          double prod = 1.0;
          for (int j : tup) prod *= (j == i) ? atom(k) : x(j, k);
          s += gen.lambda_vec(k) * prod;
        }
        h -= gen_scale_ * d_.obs.ygen(static_cast<int>(t)) * s -
             0.5 * gen_scale_ * gen_scale_ * s * s;
      }
    }
    return h;
  }

  const ModelSpec& model_;
  const DisorderSample& d_;
  int n_, K_, A_;
  Eigen::MatrixXd pert_table_;
  std::vector<std::vector<int>> base_tuples_, gen_tuples_;
  std::vector<std::vector<std::size_t>> site_base_, site_gen_;
  double gen_scale_ = 0.0;
};

double split_rhat(const std::vector<std::vector<double>>& chains) {
  // split each chain in half, then the usual between/within ratio
  std::vector<std::vector<double>> seqs;
  for (const auto& c : chains) {
    const std::size_t h = c.size() / 2;
    if (h < 2) return 1.0;
    seqs.emplace_back(c.begin(), c.begin() + h);
    seqs.emplace_back(c.begin() + h, c.begin() + 2 * h);
  }
  const double len = static_cast<double>(seqs.front().size());
  std::vector<double> means;
  double w = 0.0;
  for (const auto& s : seqs) {
    Summary sm = summarize(s);
    means.push_back(sm.mean);
    w += sm.var;
  }
  w /= static_cast<double>(seqs.size());
  Summary mm = summarize(means);
  const double b = len * mm.var;
  if (w <= 0.0) return 1.0;
  const double var_plus = (len - 1.0) / len * w + b / len;
  return std::sqrt(var_plus / w);
}

}  // namespace

ReplicaBatch gibbs_sample(const ModelSpec& model, const DisorderSample& d,
                          int chains, int sweeps, int burn_in,
                          std::uint64_t seed) {
  model.validate();
  if (chains < 2) throw invalid_parameter("gibbs_sample: chains >= 2 required");
  if (sweeps < 1 || burn_in < 0) throw invalid_parameter("gibbs_sample: bad sweep counts");

  SiteSampler sampler(model, d);
  ReplicaBatch batch;
  batch.mode = ReplicaBatch::Mode::mcmc;
  batch.replicas.resize(chains);
  std::vector<std::vector<double>> energy_series(chains);

  for (int c = 0; c < chains; ++c) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(c)}));
    Eigen::MatrixXd x(model.n, model.dim());
    std::vector<double> pw(model.prior.weights.data(),
                           model.prior.weights.data() + model.prior.num_atoms());
    for (int i = 0; i < model.n; ++i)
      x.row(i) = model.prior.atoms.row(rng.categorical(pw));
    for (int s = 0; s < burn_in + sweeps; ++s) {
      for (int i = 0; i < model.n; ++i) sampler.update_site(x, i, rng);
      if (s >= burn_in) energy_series[c].push_back(total_energy(x, d, model));
    }
    batch.replicas[c] = x;
  }

  batch.diag.chains = chains;
  batch.diag.sweeps = sweeps;
  batch.diag.burn_in = burn_in;
  batch.diag.rhat = split_rhat(energy_series);
  batch.diag.mixing_warning = batch.diag.rhat > 1.1;
  return batch;
}

std::vector<double> ReplicaBatch::mc_bracket_samples(
    int arity, const ExactPosterior::Functional& f) const {
  if (mode != Mode::mcmc)
    throw invalid_parameter("mc_bracket_samples: mcmc mode only");
  if (arity < 1 || static_cast<std::size_t>(arity) > replicas.size())
    throw invalid_parameter("mc_bracket_samples: bad arity");
  std::vector<double> out;
  std::vector<const Eigen::MatrixXd*> slots(arity);
  for (std::size_t g = 0; g + arity <= replicas.size(); g += arity) {
    for (int r = 0; r < arity; ++r) slots[r] = &replicas[g + r];
    out.push_back(f(std::span<const Eigen::MatrixXd* const>(slots.data(), slots.size())));
  }
  return out;
}

FreeEnergySample free_energy(const ModelSpec& model, const DisorderSample& d,
                             std::size_t budget) {
  ExactPosterior post(model, d.obs, budget);
  FreeEnergySample f;
  f.value = -post.log_z() / static_cast<double>(model.n);
  f.n = model.n;
  f.seed = d.seed;
  if (!std::isfinite(f.value)) throw numerical_failure("free_energy: non-finite value");
  return f;
}

}  // namespace olab
