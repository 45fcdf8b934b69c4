#include "olab/model.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace olab {

void PriorSpec::validate() const {
  if (num_atoms() < 1) throw invalid_parameter("prior: at least one atom required");
  if (weights.size() != num_atoms())
    throw invalid_parameter("prior: weights/atoms size mismatch");
  double total = 0.0;
  for (int a = 0; a < num_atoms(); ++a) {
    if (weights(a) < 0.0) throw invalid_parameter("prior: negative weight");
    total += weights(a);
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw invalid_parameter("prior: weights must sum to 1");
  if (atoms.cwiseAbs().maxCoeff() > bound + 1e-12)
    throw invalid_parameter("prior: atom outside support bound");
}

PriorSpec PriorSpec::rademacher(int K) {
  if (K < 1) throw invalid_parameter("rademacher prior: K >= 1 required");
  const int A = 1 << K;
  PriorSpec p;
  p.atoms.resize(A, K);
  for (int a = 0; a < A; ++a)
    for (int k = 0; k < K; ++k) p.atoms(a, k) = (a >> k) & 1 ? 1.0 : -1.0;
  p.weights = Eigen::VectorXd::Constant(A, 1.0 / A);
  p.bound = 1.0;
  return p;
}

PriorSpec PriorSpec::from_atoms(Eigen::MatrixXd atoms, Eigen::VectorXd weights) {
  PriorSpec p;
  p.atoms = std::move(atoms);
  p.weights = std::move(weights);
  p.bound = p.atoms.size() > 0 ? p.atoms.cwiseAbs().maxCoeff() : 0.0;
  p.validate();
  return p;
}

PriorSpec PriorSpec::single_atom(Eigen::VectorXd atom) {
  PriorSpec p;
  p.atoms = atom.transpose();
  p.weights = Eigen::VectorXd::Ones(1);
  p.bound = std::max(1e-300, p.atoms.cwiseAbs().maxCoeff());
  return p;
}

Eigen::VectorXd PriorSpec::mean() const {
  return atoms.transpose() * weights;
}

Eigen::MatrixXd PriorSpec::second_moment() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim(), dim());
  for (int a = 0; a < num_atoms(); ++a)
    m += weights(a) * atoms.row(a).transpose() * atoms.row(a);
  return m;
}

double PriorSpec::mean_sq_norm() const { return second_moment().trace(); }

double PriorSpec::mean_sq_cross() const {
  double acc = 0.0;
  for (int a = 0; a < num_atoms(); ++a)
    for (int b = 0; b < num_atoms(); ++b) {
      const double dot = atoms.row(a).dot(atoms.row(b));
      acc += weights(a) * weights(b) * dot * dot;
    }
  return acc;
}

void BaseChannelSpec::validate() const {
  if (kind == ChannelKind::none) return;
  if (order() < 2) throw invalid_parameter("base channel: p >= 2 required");
  if (snr < 0.0) throw invalid_parameter("base channel: snr >= 0 required");
}

int SnrMatrix::pair_index(int l, int lp, int K) {
  if (l > lp) std::swap(l, lp);
  // row-major over the upper triangle
  return l * K - l * (l - 1) / 2 + (lp - l);
}

bool SnrMatrix::in_ensemble() const {
  for (int l = 0; l < K; ++l) {
    const double d = entries(l, l);
    if (!(d > 2.0 * K * s_n && d < (2.0 * K + 1.0) * s_n)) return false;
    for (int lp = l + 1; lp < K; ++lp) {
      const double o = entries(l, lp);
      if (std::abs(o - entries(lp, l)) > 0.0) return false;
      if (!(o > s_n && o < 2.0 * s_n)) return false;
    }
  }
  return true;
}

SnrMatrix SnrMatrix::from_entries(Eigen::MatrixXd entries, double s_n,
                                  bool with_derivs) {
  SnrMatrix m;
  m.K = static_cast<int>(entries.rows());
  m.s_n = s_n;
  if (entries.cols() != m.K) throw invalid_parameter("snr matrix: square input required");
  if ((entries - entries.transpose()).cwiseAbs().maxCoeff() > 1e-10)
    throw invalid_parameter("snr matrix: symmetric input required");
  m.entries = std::move(entries);
  m.sqrt = principal_sqrt(m.entries);
  if (with_derivs) {
    m.sqrt_derivs.resize(num_pairs(m.K));
    for (int l = 0; l < m.K; ++l)
      for (int lp = l; lp < m.K; ++lp)
        m.sqrt_derivs[pair_index(l, lp, m.K)] = sqrt_derivative(m, l, lp);
  }
  return m;
}

SnrMatrix SnrMatrix::zero(int K) {
  SnrMatrix m;
  m.K = K;
  m.s_n = 0.0;
  m.entries = Eigen::MatrixXd::Zero(K, K);
  m.sqrt = Eigen::MatrixXd::Zero(K, K);
  return m;
}

SnrMatrix SnrMatrix::midpoint(int K, double s_n) {
  Eigen::MatrixXd e(K, K);
  for (int l = 0; l < K; ++l) {
    e(l, l) = (2.0 * K + 0.5) * s_n;
    for (int lp = l + 1; lp < K; ++lp) e(l, lp) = e(lp, l) = 1.5 * s_n;
  }
  return from_entries(std::move(e), s_n);
}

SnrMatrix sample_snr_matrix(int K, double s_n, Rng& rng) {
  if (K < 1) throw invalid_parameter("sample_snr_matrix: K >= 1 required");
  if (!(s_n > 0.0 && s_n <= 1.0))
    throw invalid_parameter("sample_snr_matrix: s_n in (0,1] required");
  Eigen::MatrixXd e(K, K);
  // fixed draw order: diagonal first, then upper triangle row by row
  for (int l = 0; l < K; ++l) e(l, l) = rng.uniform(2.0 * K * s_n, (2.0 * K + 1.0) * s_n);
  for (int l = 0; l < K; ++l)
    for (int lp = l + 1; lp < K; ++lp) e(l, lp) = e(lp, l) = rng.uniform(s_n, 2.0 * s_n);
  return SnrMatrix::from_entries(std::move(e), s_n);
}

Eigen::MatrixXd principal_sqrt(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw invalid_parameter("principal_sqrt: square input required");
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10)
    throw invalid_parameter("principal_sqrt: symmetric input required");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  Eigen::VectorXd ev = es.eigenvalues();
  for (int i = 0; i < ev.size(); ++i) ev(i) = std::sqrt(std::max(ev(i), 0.0));
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

Eigen::MatrixXd sqrt_derivative(const SnrMatrix& lambda, int l, int lp) {
  const int K = lambda.K;
  if (l < 0 || lp < 0 || l >= K || lp >= K)
    throw invalid_parameter("sqrt_derivative: index out of range");
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(K, K);
  if (l == lp) {
    rhs(l, l) = 1.0;
  } else {
    rhs(l, lp) = 1.0;
    rhs(lp, l) = 1.0;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(lambda.sqrt);
  const Eigen::VectorXd& mu = es.eigenvalues();
  if (mu.minCoeff() <= 1e-14)
    throw numerical_failure("sqrt_derivative: singular SNR matrix");
  const Eigen::MatrixXd rhs_eig = es.eigenvectors().transpose() * rhs * es.eigenvectors();
  Eigen::MatrixXd d_eig(K, K);
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < K; ++j) d_eig(i, j) = rhs_eig(i, j) / (mu(i) + mu(j));
  return es.eigenvectors() * d_eig * es.eigenvectors().transpose();
}

void GeneralizedPerturbSpec::validate() const {
  // the channel enumerates all n^p index tuples; keep the order desk-scale
  if (p < 1 || p > 3)
    throw invalid_parameter("generalized perturbation: p in [1,3] required");
  if (!(gamma > 0.0)) throw invalid_parameter("generalized perturbation: gamma > 0 required");
  for (int k = 0; k < lambda_vec.size(); ++k) {
    const double v = lambda_vec(k);
    if (v != -1.0 && v != 0.0 && v != 1.0)
      throw invalid_parameter("generalized perturbation: lambda_vec entries in {-1,0,1}");
  }
}

void ModelSpec::validate() const {
  prior.validate();
  base.validate();
  if (n < 1) throw invalid_parameter("model: n >= 1 required");
  if (lambda.K != prior.dim()) throw invalid_parameter("model: lambda dimension mismatch");
  if (gen) {
    gen->validate();
    if (gen->lambda_vec.size() != prior.dim())
      throw invalid_parameter("model: gen lambda_vec dimension mismatch");
  }
}

std::vector<std::vector<int>> ordered_tuples(int n, int p) {
  std::vector<std::vector<int>> out;
  std::vector<int> tuple(p, 0);
  while (true) {
    out.push_back(tuple);
    int j = p - 1;
    while (j >= 0 && tuple[j] == n - 1) --j;
    if (j < 0) break;
    const int v = tuple[j] + 1;
    for (int i = j; i < p; ++i) tuple[i] = v;
  }
  return out;
}

std::vector<std::vector<int>> all_tuples(int n, int p) {
  std::vector<std::vector<int>> out;
  std::vector<int> tuple(p, 0);
  while (true) {
    out.push_back(tuple);
    int j = p - 1;
    while (j >= 0 && tuple[j] == n - 1) {
      tuple[j] = 0;
      --j;
    }
    if (j < 0) break;
    ++tuple[j];
  }
  return out;
}

double base_signal_term(const Eigen::MatrixXd& x, const std::vector<int>& tuple,
                        const BaseChannelSpec& base, int n) {
  const int K = static_cast<int>(x.cols());
  const int p = base.order();
  double acc = 0.0;
  for (int k = 0; k < K; ++k) {
    double prod = 1.0;
    for (int j = 0; j < p; ++j) prod *= x(tuple[j], k);
    acc += prod;
  }
  return base.snr * std::pow(static_cast<double>(n), (1.0 - p) / 2.0) * acc;
}

double gen_signal_term(const Eigen::MatrixXd& x, const std::vector<int>& tuple,
                       const GeneralizedPerturbSpec& gen) {
  const int K = static_cast<int>(x.cols());
  double acc = 0.0;
  for (int k = 0; k < K; ++k) {
    if (gen.lambda_vec(k) == 0.0) continue;
    double prod = 1.0;
    for (int j = 0; j < gen.p; ++j) prod *= x(tuple[j], k);
    acc += gen.lambda_vec(k) * prod;
  }
  return acc;
}

DisorderSample generate_disorder(const ModelSpec& model, std::uint64_t seed) {
  model.validate();
  const int n = model.n;
  const int K = model.dim();
  DisorderSample d;
  d.seed = seed;

  Rng rx(derive_seed(seed, {0}));
  d.x.resize(n, K);
  for (int i = 0; i < n; ++i) {
    std::vector<double> w(model.prior.weights.data(),
                          model.prior.weights.data() + model.prior.num_atoms());
    const int a = rx.categorical(w);
    d.x.row(i) = model.prior.atoms.row(a);
  }

  if (model.base.active()) {
    Rng rz(derive_seed(seed, {1}));
    const auto tuples = ordered_tuples(n, model.base.order());
    d.ztilde.resize(static_cast<int>(tuples.size()));
    d.obs.ytilde.resize(d.ztilde.size());
    for (std::size_t t = 0; t < tuples.size(); ++t) {
      d.ztilde(static_cast<int>(t)) = rz.gaussian();
      d.obs.ytilde(static_cast<int>(t)) =
          base_signal_term(d.x, tuples[t], model.base, n) + d.ztilde(static_cast<int>(t));
    }
  }

  {
    Rng rz(derive_seed(seed, {2}));
    d.z.resize(n, K);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < K; ++k) d.z(i, k) = rz.gaussian();
    d.obs.y = d.x * model.lambda.sqrt + d.z;
  }

  if (model.gen) {
    Rng rz(derive_seed(seed, {3}));
    const auto tuples = all_tuples(n, model.gen->p);
    d.zgen.resize(static_cast<int>(tuples.size()));
    d.obs.ygen.resize(d.zgen.size());
    const double scale =
        model.gen->gamma * std::pow(static_cast<double>(n), (1.0 - model.gen->p) / 2.0);
    for (std::size_t t = 0; t < tuples.size(); ++t) {
      d.zgen(static_cast<int>(t)) = rz.gaussian();
      d.obs.ygen(static_cast<int>(t)) =
          scale * gen_signal_term(d.x, tuples[t], *model.gen) + d.zgen(static_cast<int>(t));
    }
  }
  return d;
}

double base_energy(const Eigen::MatrixXd& x, const Eigen::VectorXd& ytilde,
                   const BaseChannelSpec& base, int n) {
  if (!base.active()) return 0.0;
  const auto tuples = ordered_tuples(n, base.order());
  if (ytilde.size() != static_cast<int>(tuples.size()))
    throw invalid_parameter("base_energy: observation size mismatch");
  double h = 0.0;
  for (std::size_t t = 0; t < tuples.size(); ++t) {
    const double m = base_signal_term(x, tuples[t], base, n);
    h += 0.5 * m * m - ytilde(static_cast<int>(t)) * m;
  }
  return h;
}

double perturb_energy(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                      const SnrMatrix& lambda) {
  if (x.rows() != y.rows() || x.cols() != y.cols())
    throw invalid_parameter("perturb_energy: shape mismatch");
  // sum_i ( x_i^T lambda x_i / 2 - x_i^T sqrt(lambda) Y_i )
  const double quad = (x * lambda.entries).cwiseProduct(x).sum();
  const double data = (y * lambda.sqrt).cwiseProduct(x).sum();
  return 0.5 * quad - data;
}

double gen_energy(const Eigen::MatrixXd& x, const Eigen::VectorXd& ygen,
                  const GeneralizedPerturbSpec& gen, int n) {
  const auto tuples = all_tuples(n, gen.p);
  if (ygen.size() != static_cast<int>(tuples.size()))
    throw invalid_parameter("gen_energy: observation size mismatch");
  const double scale = gen.gamma * std::pow(static_cast<double>(n), (1.0 - gen.p) / 2.0);
  double h = 0.0;
  for (std::size_t t = 0; t < tuples.size(); ++t) {
    const double s = gen_signal_term(x, tuples[t], gen);
    h -= scale * ygen(static_cast<int>(t)) * s - 0.5 * scale * scale * s * s;
  }
  return h;
}

double total_energy(const Eigen::MatrixXd& x, const DisorderSample& d,
                    const ModelSpec& model) {
  if (x.rows() != model.n || x.cols() != model.dim())
    throw invalid_parameter("total_energy: config shape mismatch");
  double h = base_energy(x, d.obs.ytilde, model.base, model.n);
  h += perturb_energy(x, d.obs.y, model.lambda);
  if (model.gen) h += gen_energy(x, d.obs.ygen, *model.gen, model.n);
  return h;
}

double perturb_energy_xz(const Eigen::MatrixXd& x, const Eigen::MatrixXd& X,
                         const Eigen::MatrixXd& z, const SnrMatrix& lambda) {
  const double quad = (x * lambda.entries).cwiseProduct(x).sum();
  const double signal = (X * lambda.entries).cwiseProduct(x).sum();
  const double noise = (z * lambda.sqrt).cwiseProduct(x).sum();
  return 0.5 * quad - signal - noise;
}

double gen_energy_xz(const Eigen::MatrixXd& x, const Eigen::MatrixXd& X,
                     const Eigen::VectorXd& zgen,
                     const GeneralizedPerturbSpec& gen, int n) {
  const auto tuples = all_tuples(n, gen.p);
  const double scale = gen.gamma * std::pow(static_cast<double>(n), (1.0 - gen.p) / 2.0);
  double h = 0.0;
  for (std::size_t t = 0; t < tuples.size(); ++t) {
    const double sx = gen_signal_term(x, tuples[t], gen);
    const double sX = gen_signal_term(X, tuples[t], gen);
    h -= scale * scale * sX * sx + scale * zgen(static_cast<int>(t)) * sx -
         0.5 * scale * scale * sx * sx;
  }
  return h;
}

}  // namespace olab
