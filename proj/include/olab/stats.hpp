#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "olab/common.hpp"

namespace olab {

struct Summary {
  double mean = 0.0;
  double se = 0.0;    // standard error of the mean
  double var = 0.0;   // unbiased sample variance
  std::size_t n = 0;
};

inline Summary summarize(std::span<const double> xs) {
  Summary s;
  s.n = xs.size();
  if (s.n == 0) return s;
  double m = 0.0;
  for (double x : xs) m += x;
  m /= static_cast<double>(s.n);
  double v = 0.0;
  for (double x : xs) v += (x - m) * (x - m);
  s.mean = m;
  if (s.n > 1) {
    s.var = v / static_cast<double>(s.n - 1);
    s.se = std::sqrt(s.var / static_cast<double>(s.n));
  }
  return s;
}

// Unbiased estimator of (E X)^2: mean^2 - var/n.
inline double unbiased_sq_mean(std::span<const double> xs) {
  Summary s = summarize(xs);
  if (s.n < 2) return s.mean * s.mean;
  return s.mean * s.mean - s.var / static_cast<double>(s.n);
}

inline double logsumexp(std::span<const double> xs) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double x : xs) mx = std::max(mx, x);
  if (!std::isfinite(mx)) return mx;
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - mx);
  return mx + std::log(acc);
}

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
};

// Least squares of log(y) against log(x); nonpositive y entries are clipped.
inline SlopeFit loglog_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw invalid_parameter("loglog_fit: need >= 2 matching points");
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(std::max(y[i], 1e-300));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double nn = static_cast<double>(n);
  const double denom = nn * sxx - sx * sx;
  SlopeFit f;
  f.slope = (nn * sxy - sx * sy) / denom;
  f.intercept = (sy - f.slope * sx) / nn;
  return f;
}

// z-score of a difference given its combined standard error.
inline double zscore(double lhs, double rhs, double se) {
  if (se <= 0.0) return std::abs(lhs - rhs) == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::abs(lhs - rhs) / se;
}

}  // namespace olab
