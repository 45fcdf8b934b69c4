#include "olab/identities.hpp"

#include <cmath>

#include "olab/quadrature.hpp"
#include "olab/stats.hpp"

namespace olab {

IdentityReport make_report(std::string name, int n, double lhs, double rhs,
                           double se, std::size_t samples, double z_max,
                           double atol) {
  IdentityReport r;
  r.name = std::move(name);
  r.n = n;
  r.lhs = lhs;
  r.rhs = rhs;
  r.se = se;
  r.samples = samples;
  r.z_max = z_max;
  r.atol = atol;
  r.zscore = zscore(lhs, rhs, se);
  r.pass = std::abs(lhs - rhs) <= std::max(z_max * se, atol);
  return r;
}

ReplicaFunctional q_entry_functional(int k, int kp) {
  ReplicaFunctional f;
  f.name = "Q[" + std::to_string(k + 1) + "," + std::to_string(kp + 1) + "]";
  f.slots = 2;
  f.eval = [k, kp](const Observations&,
                   std::span<const Eigen::MatrixXd* const> s) {
    return overlap(*s[0], *s[1])(k, kp);
  };
  return f;
}

ReplicaFunctional q_entry_sq_functional(int k, int kp) {
  ReplicaFunctional f;
  f.name = "Q^2[" + std::to_string(k + 1) + "," + std::to_string(kp + 1) + "]";
  f.slots = 2;
  f.eval = [k, kp](const Observations&,
                   std::span<const Eigen::MatrixXd* const> s) {
    const double q = overlap(*s[0], *s[1])(k, kp);
    return q * q;
  };
  return f;
}

ReplicaFunctional gen_overlap_functional(int p, Eigen::VectorXd lambda_vec) {
  ReplicaFunctional f;
  f.name = "Q^(p" + std::to_string(p) + ")";
  f.slots = 2;
  f.eval = [p, lv = std::move(lambda_vec)](
               const Observations&, std::span<const Eigen::MatrixXd* const> s) {
    return generalized_overlap(*s[0], *s[1], p, lv);
  };
  return f;
}

IdentityReport check_nishimori(const ModelTemplate& tmpl, int n,
                               const ReplicaFunctional& f, const McConfig& cfg) {
  const Eigen::MatrixXd table =
      mc_table(tmpl, n, cfg, 3, [&](const DrawContext& ctx, std::span<double> row) {
        auto g = [&](std::span<const Eigen::MatrixXd* const> s) {
          return f.eval(ctx.disorder.obs, s);
        };
        const double lhs = ctx.posterior.bracket(f.slots, g);
        const Eigen::MatrixXd* fixed[] = {&ctx.disorder.x};
        const double rhs = ctx.posterior.bracket(f.slots - 1, g, fixed);
        row[0] = lhs;
        row[1] = rhs;
        row[2] = lhs - rhs;
      });
  const auto rows = static_cast<std::size_t>(table.rows());
  std::vector<double> diff(table.col(2).data(), table.col(2).data() + rows);
  const Summary ds = summarize(diff);
  return make_report("nishimori:" + f.name, n, table.col(0).mean(),
                     table.col(1).mean(), ds.se, rows, cfg.tol_z, cfg.atol);
}

IdentityReport check_nishimori_exact(const ModelTemplate& tmpl, int n,
                                     const ReplicaFunctional& f, int nodes,
                                     double atol) {
  const SnrMatrix lambda = tmpl.fixed_lambda();
  const double beta = tmpl.gen ? tmpl.gen->beta : 1.0;
  const ModelSpec model = tmpl.instantiate(n, lambda, beta);
  model.validate();
  const int K = model.dim();
  const int A = model.prior.num_atoms();

  // enumerate the signal configurations and their observation means
  std::size_t scount = 1;
  for (int i = 0; i < n; ++i) scount *= static_cast<std::size_t>(A);
  if (scount > 4096)
    throw resource_limit("check_nishimori_exact: signal enumeration too large");

  const auto base_tups =
      model.base.active() ? ordered_tuples(n, model.base.order())
                          : std::vector<std::vector<int>>{};
  const auto gen_tups =
      model.gen ? all_tuples(n, model.gen->p) : std::vector<std::vector<int>>{};
  const int dim_base = static_cast<int>(base_tups.size());
  const int dim_y = n * K;
  const int dim_gen = static_cast<int>(gen_tups.size());
  const int D = dim_base + dim_y + dim_gen;
  const double total_nodes = std::pow(static_cast<double>(nodes), D);
  if (total_nodes > 4e6)
    throw resource_limit("check_nishimori_exact: node grid too large");

  const double gen_scale =
      model.gen ? model.gen->gamma *
                      std::pow(static_cast<double>(n), (1.0 - model.gen->p) / 2.0)
                : 0.0;

  std::vector<Eigen::MatrixXd> signals(scount);
  std::vector<double> sweight(scount);
  std::vector<Eigen::VectorXd> mu(scount);
  std::vector<int> digits(n, 0);
  for (std::size_t s = 0; s < scount; ++s) {
    Eigen::MatrixXd x(n, K);
    double w = 1.0;
    for (int i = 0; i < n; ++i) {
      x.row(i) = model.prior.atoms.row(digits[i]);
      w *= model.prior.weights(digits[i]);
    }
    signals[s] = x;
    sweight[s] = w;
    Eigen::VectorXd m(D);
    int off = 0;
    for (const auto& t : base_tups) m(off++) = base_signal_term(x, t, model.base, n);
    const Eigen::MatrixXd ymean = x * lambda.sqrt;
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < K; ++k) m(off++) = ymean(i, k);
    for (const auto& t : gen_tups)
      m(off++) = gen_scale * gen_signal_term(x, t, *model.gen);
    mu[s] = m;
    for (int i = 0; i < n; ++i) {
      if (++digits[i] < A) break;
      digits[i] = 0;
    }
  }

  const GaussHermite gh = gauss_hermite(nodes);
  double lhs_acc = 0.0, rhs_acc = 0.0, norm_acc = 0.0;

  std::vector<int> node_idx(D, 0);
  Eigen::VectorXd y(D);
  while (true) {
    double wq = 1.0;
    for (int d = 0; d < D; ++d) {
      y(d) = gh.nodes[node_idx[d]];
      wq *= gh.weights[node_idx[d]];
    }
    Observations obs;
    int off = 0;
    if (dim_base > 0) obs.ytilde = y.segment(0, dim_base);
    off = dim_base;
    obs.y.resize(n, K);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < K; ++k) obs.y(i, k) = y(off++);
    if (dim_gen > 0) obs.ygen = y.segment(off, dim_gen);

    const ExactPosterior post(model, obs);
    auto g = [&](std::span<const Eigen::MatrixXd* const> sl) {
      return f.eval(obs, sl);
    };
    const double bracket_all = post.bracket(f.slots, g);

    double rho = 0.0, rhs_mix = 0.0;
    for (std::size_t s = 0; s < scount; ++s) {
      const double e = std::exp(y.dot(mu[s]) - 0.5 * mu[s].squaredNorm());
      rho += sweight[s] * e;
      const Eigen::MatrixXd* fixed[] = {&signals[s]};
      rhs_mix += sweight[s] * e * post.bracket(f.slots - 1, g, fixed);
    }
    lhs_acc += wq * rho * bracket_all;
    rhs_acc += wq * rhs_mix;
    norm_acc += wq * rho;

    int d = 0;
    for (; d < D; ++d) {
      if (++node_idx[d] < nodes) break;
      node_idx[d] = 0;
    }
    if (d == D) break;
  }

  return make_report("nishimori-exact:" + f.name, n, lhs_acc / norm_acc,
                     rhs_acc / norm_acc, 0.0, 1, 0.0, atol);
}

std::vector<IdentityReport> check_nishimori_suite(const ModelTemplate& tmpl,
                                                  int n, const McConfig& cfg) {
  const int K = tmpl.dim();
  struct Entry {
    std::string name;
    int col;  // base column (lhs, rhs, diff triplet)
  };
  std::vector<Entry> entries;
  int col = 0;
  for (int k = 0; k < K; ++k)
    for (int kp = k; kp < K; ++kp) {
      entries.push_back({"nishimori:Q[" + std::to_string(k + 1) + "," +
                             std::to_string(kp + 1) + "]",
                         col});
      col += 3;
      entries.push_back({"nishimori:Q^2[" + std::to_string(k + 1) + "," +
                             std::to_string(kp + 1) + "]",
                         col});
      col += 3;
    }
  entries.push_back({"nishimori:Q^(p2)", col});
  col += 3;

  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(K);
  const Eigen::MatrixXd table =
      mc_table(tmpl, n, cfg, col, [&](const DrawContext& ctx, std::span<double> row) {
        const BracketMoments b = bracket_moments(ctx.posterior, ctx.disorder.x);
        int c = 0;
        for (int k = 0; k < K; ++k)
          for (int kp = k; kp < K; ++kp) {
            row[c++] = b.q12_mean(k, kp);
            row[c++] = b.q_mean(k, kp);
            row[c++] = b.q12_mean(k, kp) - b.q_mean(k, kp);
            row[c++] = b.q12_sq(k, kp);
            row[c++] = b.q_sq(k, kp);
            row[c++] = b.q12_sq(k, kp) - b.q_sq(k, kp);
          }
        double l2 = 0.0, r2 = 0.0;
        for (int k = 0; k < K; ++k)
          for (int kp = 0; kp < K; ++kp) {
            l2 += ones(k) * ones(kp) * b.q12_sq(k, kp);
            r2 += ones(k) * ones(kp) * b.q_sq(k, kp);
          }
        row[c++] = l2;
        row[c++] = r2;
        row[c++] = l2 - r2;
      });

  const auto rows = static_cast<std::size_t>(table.rows());
  std::vector<IdentityReport> out;
  for (const auto& e : entries) {
    std::vector<double> diff(rows);
    for (std::size_t i = 0; i < rows; ++i) diff[i] = table(i, e.col + 2);
    const Summary ds = summarize(diff);
    out.push_back(make_report(e.name, n, table.col(e.col).mean(),
                              table.col(e.col + 1).mean(), ds.se, rows,
                              cfg.tol_z, cfg.atol));
  }
  return out;
}

std::vector<IdentityReport> check_l_q_relation(const ModelTemplate& tmpl, int n,
                                               const McConfig& cfg) {
  if (!tmpl.matrix_channel)
    throw invalid_parameter("check_l_q_relation: matrix channel required");
  const int K = tmpl.dim();
  const int pairs = SnrMatrix::num_pairs(K);
  const Eigen::MatrixXd table = mc_table(
      tmpl, n, cfg, 3 * pairs, [&](const DrawContext& ctx, std::span<double> row) {
        const LBrackets lb =
            l_brackets(ctx.posterior, ctx.disorder, ctx.model.lambda);
        const Eigen::MatrixXd q_mean =
            ctx.disorder.x.transpose() * ctx.posterior.mean() / n;
        int c = 0;
        for (int l = 0; l < K; ++l)
          for (int lp = l; lp < K; ++lp) {
            const double lhs = lb.mean(l, lp);
            const double rhs = l == lp ? -0.5 * q_mean(l, l) : -q_mean(l, lp);
            row[c++] = lhs;
            row[c++] = rhs;
            row[c++] = lhs - rhs;
          }
      });

  const auto rows = static_cast<std::size_t>(table.rows());
  std::vector<IdentityReport> out;
  int c = 0;
  for (int l = 0; l < K; ++l)
    for (int lp = l; lp < K; ++lp) {
      std::vector<double> diff(rows);
      for (std::size_t i = 0; i < rows; ++i) diff[i] = table(i, c + 2);
      const Summary ds = summarize(diff);
      out.push_back(make_report("l_q[" + std::to_string(l + 1) + "," +
                                    std::to_string(lp + 1) + "]",
                                n, table.col(c).mean(), table.col(c + 1).mean(),
                                ds.se, rows, cfg.tol_z, cfg.atol));
      c += 3;
    }
  return out;
}

namespace {

// <Q^(p)_{0,1}> and friends with the cheapest route available for the order.
struct GenMoments {
  double q01, q01_sq, q12, q12_q01;
};

GenMoments gen_moments(const DrawContext& ctx) {
  const auto& gen = *ctx.model.gen;
  GenMoments g{};
  if (gen.p == 1) {
    const ProjectedMoments pm =
        projected_moments(ctx.posterior, ctx.disorder.x, gen.lambda_vec);
    g.q01 = pm.q01;
    g.q01_sq = pm.q01_sq;
    g.q12 = pm.q12;
    g.q12_q01 = pm.q12_q01;
    return g;
  }
  const auto& X = ctx.disorder.x;
  g.q01 = ctx.posterior.bracket1([&](const Eigen::MatrixXd& x) {
    return generalized_overlap(X, x, gen.p, gen.lambda_vec);
  });
  g.q01_sq = ctx.posterior.bracket1([&](const Eigen::MatrixXd& x) {
    const double q = generalized_overlap(X, x, gen.p, gen.lambda_vec);
    return q * q;
  });
  g.q12 = ctx.posterior.bracket(2, [&](std::span<const Eigen::MatrixXd* const> s) {
    return generalized_overlap(*s[0], *s[1], gen.p, gen.lambda_vec);
  });
  g.q12_q01 =
      ctx.posterior.bracket(2, [&](std::span<const Eigen::MatrixXd* const> s) {
        return generalized_overlap(*s[0], *s[1], gen.p, gen.lambda_vec) *
               generalized_overlap(X, *s[0], gen.p, gen.lambda_vec);
      });
  return g;
}

bool magnitudes_decreasing(const std::vector<IdentityReport>& reports) {
  for (std::size_t i = 0; i + 1 < reports.size(); ++i)
    if (!(std::abs(reports[i + 1].lhs) < std::abs(reports[i].lhs))) return false;
  return true;
}

}  // namespace

GgReport check_gg_identity(const ModelTemplate& tmpl, std::span<const int> n_grid,
                           const GgFunctional& f, int A, const McConfig& cfg) {
  if (!tmpl.gen) throw invalid_parameter("check_gg_identity: gen channel required");
  if (A < 1) throw invalid_parameter("check_gg_identity: A >= 1 required");
  GgReport out;
  for (int n : n_grid) {
    const Eigen::MatrixXd table = mc_table(
        tmpl, n, cfg, 5, [&](const DrawContext& ctx, std::span<double> row) {
          const auto& gen = *ctx.model.gen;
          const auto& X = ctx.disorder.x;
          auto qp = [&](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
            return generalized_overlap(a, b, gen.p, gen.lambda_vec);
          };
          const Eigen::MatrixXd* sig[] = {&X};
          // (1/A) sum_{a=2}^A <Q_{1,a} f>, one A-replica bracket
          row[0] = A < 2 ? 0.0
                         : ctx.posterior.bracket(
                               A,
                               [&](std::span<const Eigen::MatrixXd* const> s) {
                                 // s[0] = signal, s[1..A] = replicas
                                 double acc = 0.0;
                                 for (int a = 2; a <= A; ++a)
                                   acc += qp(*s[1], *s[a]);
                                 return acc / A * f.eval(s);
                               },
                               sig);
          row[1] = ctx.posterior.bracket1(
              [&](const Eigen::MatrixXd& x) { return qp(X, x); });
          row[2] = ctx.posterior.bracket(A, f.eval, sig);
          row[3] = ctx.posterior.bracket(
              A + 1,
              [&](std::span<const Eigen::MatrixXd* const> s) {
                // f sees slots 0..A; the extra replica A+1 enters the overlap
                return qp(*s[1], *s[A + 1]) *
                       f.eval(std::span<const Eigen::MatrixXd* const>(s.data(), A + 1));
              },
              sig);
          row[4] = ctx.posterior.bracket(
              A,
              [&](std::span<const Eigen::MatrixXd* const> s) {
                return qp(X, *s[1]) * f.eval(s);
              },
              sig);
        });
    const double invA = 1.0 / A;
    const JackknifeResult jr =
        jackknife(table, [invA](const Eigen::VectorXd& m) {
          return m(0) - invA * m(1) * m(2) - m(3) + 2.0 * invA * m(4);
        });
    out.per_n.push_back(make_report("gg:" + f.name, n, jr.estimate, 0.0, jr.se,
                                    static_cast<std::size_t>(table.rows()),
                                    cfg.tol_z, cfg.atol));
  }
  out.residual_decreasing = magnitudes_decreasing(out.per_n);
  return out;
}

GgReport check_gg_nishimori_collapse(const ModelTemplate& tmpl,
                                     std::span<const int> n_grid,
                                     const McConfig& cfg) {
  if (!tmpl.gen) throw invalid_parameter("gg collapse: gen channel required");
  GgReport out;
  for (int n : n_grid) {
    const Eigen::MatrixXd table = mc_table(
        tmpl, n, cfg, 3, [&](const DrawContext& ctx, std::span<double> row) {
          const GenMoments g = gen_moments(ctx);
          row[0] = g.q01;
          row[1] = g.q12;
          row[2] = g.q01 - g.q12;
        });
    const auto rows = static_cast<std::size_t>(table.rows());
    std::vector<double> diff(rows);
    for (std::size_t i = 0; i < rows; ++i) diff[i] = table(i, 2);
    const Summary ds = summarize(diff);
    out.per_n.push_back(make_report("gg:f=1", n, table.col(0).mean(),
                                    table.col(1).mean(), ds.se, rows, cfg.tol_z,
                                    cfg.atol));
  }
  // pure signal exchange: no n dependence expected, so no decay flag
  out.residual_decreasing = false;
  return out;
}

GgReport check_gg_overlap(const ModelTemplate& tmpl, std::span<const int> n_grid,
                          const McConfig& cfg) {
  if (!tmpl.gen) throw invalid_parameter("gg overlap: gen channel required");
  GgReport out;
  for (int n : n_grid) {
    const Eigen::MatrixXd table = mc_table(
        tmpl, n, cfg, 3, [&](const DrawContext& ctx, std::span<double> row) {
          const GenMoments g = gen_moments(ctx);
          row[0] = g.q01;
          row[1] = g.q01_sq;
          row[2] = g.q12_q01;
        });
    const JackknifeResult jr = jackknife(table, [](const Eigen::VectorXd& m) {
      return -m(0) * m(0) - m(2) + 2.0 * m(1);
    });
    out.per_n.push_back(make_report("gg:f=Q01", n, jr.estimate, 0.0, jr.se,
                                    static_cast<std::size_t>(table.rows()),
                                    cfg.tol_z, cfg.atol));
  }
  out.residual_decreasing = magnitudes_decreasing(out.per_n);
  return out;
}

FluctReport check_fluctuation_split(const ModelTemplate& tmpl,
                                    std::span<const int> n_grid,
                                    const McConfig& cfg) {
  if (!tmpl.gen) throw invalid_parameter("fluctuation split: gen channel required");
  FluctReport out;
  for (int n : n_grid) {
    const Eigen::MatrixXd table = mc_table(
        tmpl, n, cfg, 5, [&](const DrawContext& ctx, std::span<double> row) {
          const GenMoments g = gen_moments(ctx);
          row[0] = g.q01_sq;          // <Q^2>
          row[1] = g.q01;             // <Q>
          row[2] = g.q01 * g.q01;     // <Q>^2
          row[3] = g.q12_q01;         // <Q_{1,2} Q_{0,1}>
          row[4] = g.q12_q01 - g.q01 * g.q01;  // cross difference
        });
    const auto rows = static_cast<std::size_t>(table.rows());
    FluctPoint pt;
    pt.n = n;
    {
      std::vector<double> d(rows);
      for (std::size_t i = 0; i < rows; ++i) d[i] = table(i, 0) - table(i, 2);
      const Summary s = summarize(d);
      pt.thermal = s.mean;
      pt.thermal_se = s.se;
    }
    {
      const JackknifeResult jr = jackknife(table, [](const Eigen::VectorXd& m) {
        return m(2) - m(1) * m(1);
      });
      pt.quenched = jr.estimate;
      pt.quenched_se = jr.se;
    }
    {
      const JackknifeResult jr = jackknife(table, [](const Eigen::VectorXd& m) {
        return m(0) - m(1) * m(1);
      });
      pt.total = jr.estimate;
      pt.total_se = jr.se;
    }
    {
      const JackknifeResult jr = jackknife(table, [](const Eigen::VectorXd& m) {
        return 2.0 * m(0) - m(2) - m(1) * m(1);
      });
      pt.brace_sum = jr.estimate;
      pt.brace_sum_se = jr.se;
    }
    {
      std::vector<double> d(rows);
      for (std::size_t i = 0; i < rows; ++i) d[i] = table(i, 4);
      const Summary s = summarize(d);
      pt.cross = make_report("fluct:cross", n, table.col(3).mean(),
                             table.col(2).mean(), s.se, rows, cfg.tol_z, cfg.atol);
    }
    out.points.push_back(std::move(pt));
  }
  out.brace_sum_decreasing = true;
  for (std::size_t i = 0; i + 1 < out.points.size(); ++i)
    if (!(out.points[i + 1].brace_sum < out.points[i].brace_sum))
      out.brace_sum_decreasing = false;
  return out;
}

SamplerCheck check_sampler(const ModelSpec& model, std::uint64_t disorder_seed,
                           int chains, int sweeps, int burn_in,
                           std::uint64_t chain_seed, double tol_z) {
  const DisorderSample d = generate_disorder(model, disorder_seed);
  const ExactPosterior post(model, d.obs);
  const Eigen::MatrixXd q_exact = d.x.transpose() * post.mean() / model.n;
  const ReplicaBatch batch =
      gibbs_sample(model, d, chains, sweeps, burn_in, chain_seed);

  const int K = model.dim();
  SamplerCheck out;
  out.diag = batch.diag;
  // chains samples cannot resolve posterior mass below ~1/chains: when every
  // chain lands on the same state the plug-in se is zero although the exact
  // mean retains that unseen mass, so floor the error at the Laplace scale
  const double S = model.prior.bound;
  const double p0 = 1.0 / (chains + 2.0);
  const double se_floor = 2.0 * S * S * std::sqrt(p0 * (1.0 - p0) / chains);
  for (int k = 0; k < K; ++k)
    for (int kp = 0; kp < K; ++kp) {
      std::vector<double> qs(batch.replicas.size());
      for (std::size_t c = 0; c < batch.replicas.size(); ++c)
        qs[c] = overlap(d.x, batch.replicas[c])(k, kp);
      const Summary s = summarize(qs);
      out.reports.push_back(make_report(
          "sampler:Q[" + std::to_string(k + 1) + "," + std::to_string(kp + 1) +
              "]",
          model.n, s.mean, q_exact(k, kp), std::max(s.se, se_floor), qs.size(),
          tol_z, 1e-12));
    }
  return out;
}

std::vector<IdentityReport> check_mmse_identities(const ModelTemplate& tmpl,
                                                  int n, const McConfig& cfg) {
  const double e_norm = tmpl.prior.mean_sq_norm();
  const double e_cross = tmpl.prior.mean_sq_cross();
  const Eigen::MatrixXd table = mc_table(
      tmpl, n, cfg, 4, [&](const DrawContext& ctx, std::span<double> row) {
        const MmseSample ms = mmse_metrics(ctx.posterior, ctx.disorder);
        const BracketMoments b = bracket_moments(ctx.posterior, ctx.disorder.x);
        row[0] = ms.mmse;
        row[1] = ms.mmse + b.q_mean.trace() - e_norm;  // scalar identity diff
        row[2] = ms.matrix_mmse;
        row[3] = ms.matrix_mmse + b.q_sq.sum() - e_cross;  // matrix identity diff
      });
  const auto rows = static_cast<std::size_t>(table.rows());
  std::vector<IdentityReport> out;
  {
    std::vector<double> d(rows);
    for (std::size_t i = 0; i < rows; ++i) d[i] = table(i, 1);
    const Summary s = summarize(d);
    out.push_back(make_report("mmse", n, table.col(0).mean(),
                              table.col(0).mean() - s.mean, s.se, rows,
                              cfg.tol_z, cfg.atol));
  }
  {
    std::vector<double> d(rows);
    for (std::size_t i = 0; i < rows; ++i) d[i] = table(i, 3);
    const Summary s = summarize(d);
    IdentityReport r = make_report("matrix_mmse", n, table.col(2).mean(),
                                   table.col(2).mean() - s.mean, s.se, rows,
                                   cfg.tol_z, 2.0 / n);
    // additive slack: the identity carries an unspecified O(1/n) correction
    r.pass = std::abs(r.lhs - r.rhs) <= cfg.tol_z * r.se + 2.0 / n;
    out.push_back(r);
  }
  return out;
}

}  // namespace olab
