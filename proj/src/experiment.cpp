#include "olab/experiment.hpp"

#include "olab/parallel.hpp"

namespace olab {

SnrMatrix ModelTemplate::fixed_lambda() const {
  return matrix_channel ? SnrMatrix::midpoint(dim(), s_n) : SnrMatrix::zero(dim());
}

SnrMatrix ModelTemplate::draw_lambda(Rng& rng) const {
  return matrix_channel ? sample_snr_matrix(dim(), s_n, rng) : SnrMatrix::zero(dim());
}

ModelSpec ModelTemplate::instantiate(int n, const SnrMatrix& lambda,
                                     double beta) const {
  ModelSpec m;
  m.prior = prior;
  m.base = base;
  m.lambda = lambda;
  m.n = n;
  if (gen) {
    GeneralizedPerturbSpec g;
    g.p = gen->p;
    g.lambda_vec = gen->lambda_vec;
    g.gamma = s_n * beta;
    m.gen = g;
  }
  return m;
}

Eigen::MatrixXd mc_table(const ModelTemplate& tmpl, int n, const McConfig& cfg,
                         int ncols, const DrawKernel& kernel) {
  const std::size_t blocks = std::max<std::size_t>(1, cfg.draws_lambda);
  const std::size_t per_block = std::max<std::size_t>(1, cfg.draws_disorder);
  const std::size_t total = blocks * per_block;

  std::vector<SnrMatrix> lambdas;
  lambdas.reserve(blocks);
  for (std::size_t li = 0; li < blocks; ++li) {
    if (cfg.sample_lambda) {
      Rng lr(derive_seed(cfg.seed, {0xAAull, static_cast<std::uint64_t>(n), li}));
      lambdas.push_back(tmpl.draw_lambda(lr));
    } else {
      lambdas.push_back(tmpl.fixed_lambda());
    }
  }

  Eigen::MatrixXd table(total, ncols);
  parallel_for(total, cfg.jobs, [&](std::size_t t) {
    const std::size_t li = t / per_block;
    const std::size_t di = t % per_block;
    const std::uint64_t dseed = derive_seed(
        cfg.seed, {0xBBull, static_cast<std::uint64_t>(n), li, di});
    double beta = tmpl.gen ? tmpl.gen->beta : 1.0;
    if (tmpl.gen && tmpl.gen->average_beta) {
      Rng br(derive_seed(cfg.seed, {0xCCull, static_cast<std::uint64_t>(n), li, di}));
      beta = br.uniform(1.0, 2.0);
    }
    const ModelSpec model = tmpl.instantiate(n, lambdas[li], beta);
    const DisorderSample d = generate_disorder(model, dseed);
    const ExactPosterior post(model, d.obs);
    DrawContext ctx{model, d, post, li, di};
    std::vector<double> row(ncols, 0.0);
    kernel(ctx, row);
    for (int j = 0; j < ncols; ++j) table(static_cast<Eigen::Index>(t), j) = row[j];
  });
  return table;
}

JackknifeResult jackknife(const Eigen::MatrixXd& table,
                          const std::function<double(const Eigen::VectorXd&)>& fn) {
  const auto rows = table.rows();
  JackknifeResult out;
  const Eigen::VectorXd sums = table.colwise().sum();
  out.estimate = fn(sums / static_cast<double>(rows));
  if (rows < 2) return out;
  std::vector<double> loo(rows);
  double mean_loo = 0.0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Eigen::VectorXd m =
        (sums - table.row(i).transpose()) / static_cast<double>(rows - 1);
    loo[i] = fn(m);
    mean_loo += loo[i];
  }
  mean_loo /= static_cast<double>(rows);
  double acc = 0.0;
  for (double v : loo) acc += (v - mean_loo) * (v - mean_loo);
  out.se = std::sqrt(acc * static_cast<double>(rows - 1) / static_cast<double>(rows));
  return out;
}

}  // namespace olab
