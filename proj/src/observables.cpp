#include "olab/observables.hpp"

#include <cmath>

namespace olab {

Eigen::MatrixXd overlap(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw invalid_parameter("overlap: shape mismatch");
  return a.transpose() * b / static_cast<double>(a.rows());
}

double generalized_overlap_from_r(const Eigen::MatrixXd& r, int p,
                                  const Eigen::VectorXd& lambda_vec) {
  if (p < 1) throw invalid_parameter("generalized_overlap: p >= 1 required");
  double acc = 0.0;
  for (int k = 0; k < r.rows(); ++k)
    for (int kp = 0; kp < r.cols(); ++kp) {
      if (lambda_vec(k) == 0.0 || lambda_vec(kp) == 0.0) continue;
      acc += lambda_vec(k) * lambda_vec(kp) * std::pow(r(k, kp), p);
    }
  return acc;
}

double generalized_overlap(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                           int p, const Eigen::VectorXd& lambda_vec) {
  return generalized_overlap_from_r(overlap(a, b), p, lambda_vec);
}

namespace {

// Z D_{ll'}^T for every pair, so the noise term of L is a row dot product.
std::vector<Eigen::MatrixXd> noise_projections(const DisorderSample& d,
                                               const SnrMatrix& lambda) {
  if (lambda.sqrt_derivs.empty())
    throw invalid_parameter("l_matrix: sqrt derivatives not cached");
  std::vector<Eigen::MatrixXd> proj(lambda.sqrt_derivs.size());
  for (std::size_t q = 0; q < proj.size(); ++q)
    proj[q] = d.z * lambda.sqrt_derivs[q].transpose();
  return proj;
}

Eigen::MatrixXd l_matrix_impl(const Eigen::MatrixXd& x, const DisorderSample& d,
                              const SnrMatrix& lambda,
                              const std::vector<Eigen::MatrixXd>& proj) {
  const int K = lambda.K;
  const int n = static_cast<int>(x.rows());
  Eigen::MatrixXd L(K, K);
  for (int l = 0; l < K; ++l)
    for (int lp = l; lp < K; ++lp) {
      const Eigen::MatrixXd& pz = proj[SnrMatrix::pair_index(l, lp, K)];
      double acc = 0.0;
      if (l == lp) {
        for (int i = 0; i < n; ++i)
          acc += 0.5 * x(i, l) * x(i, l) - x(i, l) * d.x(i, l) -
                 x.row(i).dot(pz.row(i));
      } else {
        for (int i = 0; i < n; ++i)
          acc += x(i, l) * x(i, lp) - x(i, l) * d.x(i, lp) -
                 x(i, lp) * d.x(i, l) - x.row(i).dot(pz.row(i));
      }
      L(l, lp) = L(lp, l) = acc / n;
    }
  return L;
}

}  // namespace

Eigen::MatrixXd l_matrix(const Eigen::MatrixXd& x, const DisorderSample& d,
                         const SnrMatrix& lambda) {
  return l_matrix_impl(x, d, lambda, noise_projections(d, lambda));
}

double l_generalized(const Eigen::MatrixXd& x, const DisorderSample& d,
                     const GeneralizedPerturbSpec& gen) {
  const int n = static_cast<int>(x.rows());
  const double q11 = generalized_overlap(x, x, gen.p, gen.lambda_vec);
  const double q01 = generalized_overlap(d.x, x, gen.p, gen.lambda_vec);
  const auto tuples = all_tuples(n, gen.p);
  double noise = 0.0;
  for (std::size_t t = 0; t < tuples.size(); ++t)
    noise += d.zgen(static_cast<int>(t)) * gen_signal_term(x, tuples[t], gen);
  noise *= std::pow(static_cast<double>(n), -(1.0 + gen.p) / 2.0);
  return gen.gamma * q11 - 2.0 * gen.gamma * q01 - noise;
}

MmseSample mmse_metrics(const ExactPosterior& post, const DisorderSample& d) {
  const int n = post.n();
  const int K = post.dim();
  const Eigen::MatrixXd& m = post.mean();
  const Eigen::MatrixXd& chi = post.pair_moments();
  MmseSample out;
  const Eigen::MatrixXd res = d.x - m;
  out.mmse = res.squaredNorm() / n;
  out.mmse_matrix = res.transpose() * res / n;
  double acc = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double dot_post = 0.0;
      for (int k = 0; k < K; ++k) dot_post += chi(i * K + k, j * K + k);
      const double diff = d.x.row(i).dot(d.x.row(j)) - dot_post;
      acc += diff * diff;
    }
  out.matrix_mmse = acc / (static_cast<double>(n) * n);
  return out;
}

MmseSample mmse_metrics(const ReplicaBatch& batch, const DisorderSample& d) {
  if (batch.mode == ReplicaBatch::Mode::exact) {
    if (!batch.exact) throw invalid_parameter("mmse_metrics: empty exact batch");
    return mmse_metrics(*batch.exact, d);
  }
  const int n = static_cast<int>(d.x.rows());
  const int R = static_cast<int>(batch.replicas.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d.x.rows(), d.x.cols());
  for (const auto& r : batch.replicas) m += r;
  m /= R;
  MmseSample out;
  const Eigen::MatrixXd res = d.x - m;
  out.mmse = res.squaredNorm() / n;
  out.mmse_matrix = res.transpose() * res / n;
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
  for (const auto& r : batch.replicas) gram += r * r.transpose();
  gram /= R;
  const Eigen::MatrixXd xg = d.x * d.x.transpose();
  out.matrix_mmse = (xg - gram).squaredNorm() / (static_cast<double>(n) * n);
  return out;
}

BracketMoments bracket_moments(const ExactPosterior& post,
                               const Eigen::MatrixXd& X) {
  const int n = post.n();
  const int K = post.dim();
  const Eigen::MatrixXd& m = post.mean();
  const Eigen::MatrixXd& chi = post.pair_moments();
  BracketMoments b;
  b.q_mean = X.transpose() * m / n;
  b.q12_mean = m.transpose() * m / n;
  b.q_sq.resize(K, K);
  b.q12_sq.resize(K, K);
  for (int k = 0; k < K; ++k)
    for (int kp = 0; kp < K; ++kp) {
      double qs = 0.0, q12s = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          qs += X(i, k) * X(j, k) * chi(i * K + kp, j * K + kp);
          q12s += chi(i * K + k, j * K + k) * chi(i * K + kp, j * K + kp);
        }
      b.q_sq(k, kp) = qs / (static_cast<double>(n) * n);
      b.q12_sq(k, kp) = q12s / (static_cast<double>(n) * n);
    }
  b.thermal_q = (b.q_sq - b.q_mean.cwiseProduct(b.q_mean)).sum();
  b.gap_q12 = (b.q_sq - 2.0 * b.q_mean.cwiseProduct(b.q12_mean) +
               b.q12_mean.cwiseProduct(b.q12_mean))
                  .sum();
  return b;
}

LBrackets l_brackets(const ExactPosterior& post, const DisorderSample& d,
                     const SnrMatrix& lambda) {
  const int K = lambda.K;
  const auto proj = noise_projections(d, lambda);
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(K, K);
  Eigen::MatrixXd meansq = Eigen::MatrixXd::Zero(K, K);
  for (std::size_t c = 0; c < post.count(); ++c) {
    const Eigen::MatrixXd L = l_matrix_impl(post.config(c), d, lambda, proj);
    mean += post.weights()[c] * L;
    meansq += post.weights()[c] * L.cwiseProduct(L);
  }
  LBrackets out;
  out.mean = mean;
  out.thermal = (meansq - mean.cwiseProduct(mean)).sum();
  out.meansq_sum = meansq.sum();
  return out;
}

ProjectedMoments projected_moments(const ExactPosterior& post,
                                   const Eigen::MatrixXd& X,
                                   const Eigen::VectorXd& lambda_vec) {
  const int n = post.n();
  const int K = post.dim();
  const Eigen::MatrixXd& chi = post.pair_moments();
  const Eigen::VectorXd mt = post.mean() * lambda_vec;  // <u_i>
  const Eigen::VectorXd s = X * lambda_vec;             // signal projection
  Eigen::MatrixXd chit(n, n);                           // <u_i u_j>
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int k = 0; k < K; ++k) {
        if (lambda_vec(k) == 0.0) continue;
        for (int kp = 0; kp < K; ++kp) {
          if (lambda_vec(kp) == 0.0) continue;
          acc += lambda_vec(k) * lambda_vec(kp) * chi(i * K + k, j * K + kp);
        }
      }
      chit(i, j) = acc;
    }
  ProjectedMoments pm;
  const double nn = static_cast<double>(n);
  pm.q01 = s.dot(mt) / nn;
  pm.q12 = mt.squaredNorm() / nn;
  pm.q01_mean_sq = pm.q01 * pm.q01;
  double q01sq = 0.0, q12sq = 0.0, q12q01 = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      q01sq += s(i) * s(j) * chit(i, j);
      q12sq += chit(i, j) * chit(i, j);
      q12q01 += s(j) * chit(i, j) * mt(i);
    }
  pm.q01_sq = q01sq / (nn * nn);
  pm.q12_sq = q12sq / (nn * nn);
  pm.q12_q01 = q12q01 / (nn * nn);
  return pm;
}

}  // namespace olab
