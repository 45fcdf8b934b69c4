#include "olab/symmetry.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace olab {

Eigen::MatrixXd ReplicaOverlapArray::coordinate_array(int k, int kp) const {
  const int n = n_rep;
  Eigen::MatrixXd m(2 * n, 2 * n);
  for (int l = 0; l < n; ++l)
    for (int lp = 0; lp < n; ++lp) {
      const Eigen::MatrixXd& b = block(l, lp);
      m(l, lp) = b(k, k);
      m(l, n + lp) = b(k, kp);
      m(n + l, lp) = b(kp, k);
      m(n + l, n + lp) = b(kp, kp);
    }
  return m;
}

std::size_t TournamentOrientation::pair_slot(int l, int lp, int n) {
  if (l > lp) std::swap(l, lp);
  return static_cast<std::size_t>(l) * n - static_cast<std::size_t>(l) * (l + 1) / 2 +
         (lp - l - 1);
}

bool TournamentOrientation::edge(int from, int to) const {
  const bool fwd = forward[pair_slot(from, to, n_rep)] != 0;
  return from < to ? fwd : !fwd;
}

OverlapConstants extract_constants(const ReplicaOverlapArray& arr, int k, int kp,
                                   double tol) {
  if (arr.n_rep < 3)
    throw invalid_parameter("extract_constants: n_rep >= 3 required");
  const int n = arr.n_rep;
  double sa = 0, sd = 0, sx = 0, sy = 0, s2 = 0, s3 = 0;
  int cnt = 0;
  for (int l = 0; l < n; ++l)
    for (int lp = 0; lp < n; ++lp) {
      if (l == lp) continue;
      const Eigen::MatrixXd& b = arr.block(l, lp);
      sa += b(k, k);
      sd += b(kp, kp);
      sx += b(k, kp) + b(kp, k);
      sy += b(k, kp) * b(k, kp) + b(kp, k) * b(kp, k);
      s2 += b(k, k) + b(kp, kp) + b(k, kp) + b(kp, k);
      s3 += b(k, k) * b(k, k) + b(kp, kp) * b(kp, kp) + b(k, kp) * b(k, kp) +
            b(kp, k) * b(kp, k);
      ++cnt;
    }
  OverlapConstants c;
  c.a = sa / cnt;
  c.d = sd / cnt;
  c.x = sx / cnt;
  c.y = sy / cnt;
  const double m2 = s2 / cnt, m3 = s3 / cnt;
  // constancy of the three overlap choices (choice 1 for both coordinates)
  int worst_l = -1, worst_lp = -1;
  for (int l = 0; l < n; ++l)
    for (int lp = 0; lp < n; ++lp) {
      if (l == lp) continue;
      const Eigen::MatrixXd& b = arr.block(l, lp);
      const double dev1k = std::abs(b(k, k) - c.a);
      const double dev1kp = std::abs(b(kp, kp) - c.d);
      const double dev2 =
          std::abs(b(k, k) + b(kp, kp) + b(k, kp) + b(kp, k) - m2);
      const double dev3 = std::abs(b(k, k) * b(k, k) + b(kp, kp) * b(kp, kp) +
                                   b(k, kp) * b(k, kp) + b(kp, k) * b(kp, k) -
                                   m3);
      const double dev = std::max({dev1k, dev1kp, dev2, dev3});
      if (dev > c.max_dev) {
        c.max_dev = dev;
        worst_l = l;
        worst_lp = lp;
      }
    }
  if (c.max_dev > tol)
    throw not_replica_symmetric(
        "extract_constants: overlap choice deviates by " +
            std::to_string(c.max_dev) + " at pair (" + std::to_string(worst_l) +
            "," + std::to_string(worst_lp) + ")",
        worst_l, worst_lp);
  return c;
}

std::pair<double, double> solve_offdiagonal(double x, double y, double tol) {
  double disc = 2.0 * y - x * x;
  if (disc < -tol)
    throw inconsistent_constants("solve_offdiagonal: 2y - x^2 = " +
                                 std::to_string(disc));
  // an exactly tied pair accumulates rounding noise in 2y - x^2 that the
  // square root would amplify; flatten anything at the float-noise scale
  const double scale = std::max({x * x, 2.0 * std::abs(y), 1.0e-300});
  if (disc < 1e-12 * scale) disc = 0.0;
  const double s = std::sqrt(disc);
  return {(x + s) / 2.0, (x - s) / 2.0};
}

TournamentOrientation orient_tournament(const ReplicaOverlapArray& arr, int k,
                                        int kp, const OverlapConstants& c,
                                        double tol) {
  const auto [b, q] = solve_offdiagonal(c.x, c.y, tol);
  const int n = arr.n_rep;
  TournamentOrientation t;
  t.n_rep = n;
  t.forward.assign(static_cast<std::size_t>(n) * (n - 1) / 2, 1);
  t.tie.assign(t.forward.size(), 0);
  Eigen::Matrix2d opt1, opt2;
  opt1 << c.a, b, q, c.d;
  opt2 << c.a, q, b, c.d;
  for (int l = 0; l < n; ++l)
    for (int lp = l + 1; lp < n; ++lp) {
      const std::size_t slot = TournamentOrientation::pair_slot(l, lp, n);
      if (std::abs(b - q) <= tol) {
        t.tie[slot] = 1;
        t.forward[slot] = 1;  // low -> high by convention
        continue;
      }
      const Eigen::MatrixXd& blk = arr.block(l, lp);
      Eigen::Matrix2d m;
      m << blk(k, k), blk(k, kp), blk(kp, k), blk(kp, kp);
      const double d1 = (m - opt1).squaredNorm();
      const double d2 = (m - opt2).squaredNorm();
      t.forward[slot] = d1 <= d2 ? 1 : 0;
    }
  return t;
}

namespace {

bool one_directional(const TournamentOrientation& t, const std::vector<int>& v1,
                     const std::vector<int>& v2) {
  for (int u : v1)
    for (int v : v2)
      if (!t.edge(u, v)) return false;
  return true;
}

// all m-subsets of pool, lexicographic
bool next_combination(std::vector<int>& idx, int pool) {
  const int m = static_cast<int>(idx.size());
  for (int i = m - 1; i >= 0; --i) {
    if (idx[i] < pool - (m - i)) {
      ++idx[i];
      for (int j = i + 1; j < m; ++j) idx[j] = idx[j - 1] + 1;
      return true;
    }
  }
  return false;
}

bool exhaustive_pair(const TournamentOrientation& t, int m, SubsetPair& out) {
  const int n = t.n_rep;
  std::vector<int> sel1(m);
  for (int i = 0; i < m; ++i) sel1[i] = i;
  do {
    std::vector<int> rest;
    rest.reserve(n - m);
    {
      std::vector<char> used(n, 0);
      for (int v : sel1) used[v] = 1;
      for (int v = 0; v < n; ++v)
        if (!used[v]) rest.push_back(v);
    }
    std::vector<int> sel2(m);
    for (int i = 0; i < m; ++i) sel2[i] = i;
    do {
      std::vector<int> v2(m);
      for (int i = 0; i < m; ++i) v2[i] = rest[sel2[i]];
      if (one_directional(t, sel1, v2)) {
        out.v1 = sel1;
        out.v2 = v2;
        out.m = m;
        return true;
      }
    } while (next_combination(sel2, n - m));
  } while (next_combination(sel1, n));
  return false;
}

bool greedy_pair(const TournamentOrientation& t, int m, SubsetPair& out) {
  const int n = t.n_rep;
  std::vector<int> v1;
  std::vector<char> in_v1(n, 0);
  std::vector<int> pool(n);
  for (int v = 0; v < n; ++v) pool[v] = v;
  while (static_cast<int>(v1.size()) < m) {
    int best = -1, best_count = -1;
    for (int cand = 0; cand < n; ++cand) {
      if (in_v1[cand]) continue;
      int cnt = 0;
      for (int u : pool)
        if (u != cand && !in_v1[u] && t.edge(cand, u)) ++cnt;
      if (cnt > best_count) {
        best_count = cnt;
        best = cand;
      }
    }
    if (best < 0 || best_count < m) return false;
    v1.push_back(best);
    in_v1[best] = 1;
    std::vector<int> next_pool;
    for (int u : pool)
      if (u != best && !in_v1[u] && t.edge(best, u)) next_pool.push_back(u);
    pool = std::move(next_pool);
    if (static_cast<int>(pool.size()) < m) return false;
  }
  std::sort(v1.begin(), v1.end());
  std::sort(pool.begin(), pool.end());
  out.v1 = v1;
  out.v2.assign(pool.begin(), pool.begin() + m);
  out.m = m;
  return true;
}

}  // namespace

SubsetPair find_one_directional_subsets(const TournamentOrientation& t,
                                        int m_target) {
  if (t.n_rep < 2)
    throw invalid_parameter("find_one_directional_subsets: n_rep >= 2 required");
  const int max_m = std::min(m_target, t.n_rep / 2);
  SubsetPair out;
  const bool exhaustive = t.n_rep <= 12;
  for (int m = max_m; m >= 1; --m) {
    const bool found =
        exhaustive ? exhaustive_pair(t, m, out) : greedy_pair(t, m, out);
    if (found) {
      out.exhaustive = exhaustive;
      return out;
    }
  }
  // m = 1 always succeeds: orient any single pair
  out.v1 = {0};
  out.v2 = {t.edge(0, 1) ? 1 : 0};
  if (!t.edge(0, 1)) out.v1 = {1}, out.v2 = {0};
  out.m = 1;
  out.exhaustive = exhaustive;
  return out;
}

TournamentReport certify_b_equals_c(const ReplicaOverlapArray& arr, int k,
                                    int kp, const TournamentReport& partial) {
  TournamentReport r = partial;
  const int n = arr.n_rep;
  if (r.subsets.m < 1) throw invalid_parameter("certify: subsets required");
  const Eigen::MatrixXd m = arr.coordinate_array(k, kp);
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9)
    throw not_psd("certify: coordinate array not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  const double spectral = std::max(std::abs(es.eigenvalues()(0)),
                                   std::abs(es.eigenvalues()(2 * n - 1)));
  const double psd_tol = 1e-8 * std::max(spectral, 1.0);
  if (es.eigenvalues()(0) < -psd_tol)
    throw not_psd("certify: eigenvalue " + std::to_string(es.eigenvalues()(0)) +
                  " below -tol * norm");
  Eigen::VectorXd ev = es.eigenvalues();
  for (int i = 0; i < ev.size(); ++i) ev(i) = std::sqrt(std::max(ev(i), 0.0));
  const Eigen::MatrixXd vectors = es.eigenvectors() * ev.asDiagonal();

  const int dim = 2 * n;
  Eigen::VectorXd u1 = Eigen::VectorXd::Zero(dim), u2 = u1, w1 = u1, w2 = u1;
  for (int v : r.subsets.v1) {
    u1 += vectors.row(v).transpose();
    w1 += vectors.row(n + v).transpose();
  }
  for (int v : r.subsets.v2) {
    u2 += vectors.row(v).transpose();
    w2 += vectors.row(n + v).transpose();
  }
  const double mm = static_cast<double>(r.subsets.m);
  u1 /= mm;
  u2 /= mm;
  w1 /= mm;
  w2 /= mm;

  r.k = k;
  r.kp = kp;
  r.gap_u = (u1 - u2).squaredNorm();
  r.gap_w = (w1 - w2).squaredNorm();
  r.cross_gap = std::abs(u1.dot(w2) - w1.dot(u2));
  double self_max = 0.0;
  for (int l = 0; l < n; ++l)
    self_max = std::max({self_max, m(l, l), m(n + l, n + l)});
  r.self_overlap_max = self_max;
  r.gap_u_bound = 2.0 * (self_max + r.constants.a) / mm;
  r.gap_w_bound = 2.0 * (self_max + r.constants.d) / mm;
  r.verdict = std::abs(r.b - r.c) <= r.tol;
  return r;
}

TournamentReport run_symmetry_pipeline(const ReplicaOverlapArray& arr, int k,
                                       int kp, double tol, int m_target,
                                       double constancy_tol) {
  if (constancy_tol < 0.0) constancy_tol = tol;
  TournamentReport r;
  r.tol = tol;
  r.constants = extract_constants(arr, k, kp, constancy_tol);
  const auto [b, c] = solve_offdiagonal(r.constants.x, r.constants.y, tol);
  r.b = b;
  r.c = c;
  r.orientation = orient_tournament(arr, k, kp, r.constants, tol);
  r.subsets = find_one_directional_subsets(r.orientation, m_target);
  return certify_b_equals_c(arr, k, kp, r);
}

ReplicaOverlapArray constant_block_array(int n_rep, double a, double b,
                                         double d) {
  ReplicaOverlapArray arr;
  arr.n_rep = n_rep;
  arr.K = 2;
  Eigen::MatrixXd blk(2, 2);
  blk << a, b, b, d;
  arr.blocks.assign(static_cast<std::size_t>(n_rep) * n_rep, blk);
  return arr;
}

ReplicaOverlapArray exact_block_array(int n_rep, double a, double b, double c,
                                      double d, double diag_u, double diag_w,
                                      double e,
                                      const TournamentOrientation& orient) {
  if (orient.n_rep != n_rep)
    throw invalid_parameter("exact_block_array: orientation size mismatch");
  ReplicaOverlapArray arr;
  arr.n_rep = n_rep;
  arr.K = 2;
  arr.blocks.resize(static_cast<std::size_t>(n_rep) * n_rep);
  Eigen::MatrixXd diag(2, 2), opt1(2, 2), opt2(2, 2);
  diag << diag_u, e, e, diag_w;
  opt1 << a, b, c, d;
  opt2 << a, c, b, d;
  for (int l = 0; l < n_rep; ++l)
    for (int lp = 0; lp < n_rep; ++lp) {
      if (l == lp) {
        arr.block(l, lp) = diag;
      } else if (l < lp) {
        arr.block(l, lp) = orient.edge(l, lp) ? opt1 : opt2;
      } else {
        arr.block(l, lp) = arr.block(lp, l).transpose();
      }
    }
  return arr;
}

ReplicaOverlapArray gram_planted_array(int n_rep, double a_base, double d_base,
                                       double cross, double alpha, double beta,
                                       double gamma,
                                       const TournamentOrientation& orient) {
  if (orient.n_rep != n_rep)
    throw invalid_parameter("gram_planted_array: orientation size mismatch");
  if (!(a_base > 0.0))
    throw invalid_parameter("gram_planted_array: a_base > 0 required");
  const double delta_sq = d_base - cross * cross / a_base;
  if (delta_sq < 0.0)
    throw invalid_parameter("gram_planted_array: d_base too small for cross");
  // basis: [e_p, e_q, e_1..e_n, f_1..f_n]
  const int dim = 2 + 2 * n_rep;
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(n_rep, dim);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n_rep, dim);
  const double root = std::sqrt(static_cast<double>(n_rep - 1));
  for (int l = 0; l < n_rep; ++l) {
    u(l, 0) = std::sqrt(a_base);
    u(l, 2 + l) = alpha;
    w(l, 0) = cross / std::sqrt(a_base);
    w(l, 1) = std::sqrt(delta_sq);
    w(l, 2 + n_rep + l) = beta;
    for (int j = 0; j < n_rep; ++j) {
      if (j == l) continue;
      w(l, 2 + j) = (orient.edge(j, l) ? 1.0 : -1.0) * gamma / root;
    }
  }
  ReplicaOverlapArray arr;
  arr.n_rep = n_rep;
  arr.K = 2;
  arr.blocks.resize(static_cast<std::size_t>(n_rep) * n_rep);
  for (int l = 0; l < n_rep; ++l)
    for (int lp = 0; lp < n_rep; ++lp) {
      Eigen::MatrixXd blk(2, 2);
      blk << u.row(l).dot(u.row(lp)), u.row(l).dot(w.row(lp)),
          w.row(l).dot(u.row(lp)), w.row(l).dot(w.row(lp));
      arr.block(l, lp) = blk;
    }
  return arr;
}

TournamentOrientation transitive_orientation(int n_rep) {
  TournamentOrientation t;
  t.n_rep = n_rep;
  t.forward.assign(static_cast<std::size_t>(n_rep) * (n_rep - 1) / 2, 1);
  t.tie.assign(t.forward.size(), 0);
  return t;
}

TournamentOrientation random_orientation(int n_rep, Rng& rng) {
  TournamentOrientation t = transitive_orientation(n_rep);
  for (auto& f : t.forward) f = rng.uniform() < 0.5 ? 1 : 0;
  return t;
}

ReplicaOverlapArray sampled_overlap_array(
    const std::vector<Eigen::MatrixXd>& replicas) {
  if (replicas.size() < 2)
    throw invalid_parameter("sampled_overlap_array: >= 2 replicas required");
  ReplicaOverlapArray arr;
  arr.n_rep = static_cast<int>(replicas.size());
  arr.K = static_cast<int>(replicas.front().cols());
  arr.source = ReplicaOverlapArray::Source::sampled;
  arr.blocks.resize(static_cast<std::size_t>(arr.n_rep) * arr.n_rep);
  const double n = static_cast<double>(replicas.front().rows());
  for (int l = 0; l < arr.n_rep; ++l)
    for (int lp = 0; lp < arr.n_rep; ++lp)
      arr.block(l, lp) = replicas[l].transpose() * replicas[lp] / n;
  return arr;
}

}  // namespace olab
