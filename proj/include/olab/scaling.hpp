#pragma once

#include <string>
#include <vector>

#include "olab/experiment.hpp"
#include "olab/identities.hpp"

namespace olab {

struct ScanConfig {
  std::vector<int> n_grid;
  double s_fixed = 0.5;
  double beta_s = 0.0;  // when > 0 use the schedule s_n = n^{-beta_s}
  McConfig mc;

  double s_at(int n) const {
    return beta_s > 0.0 ? std::pow(static_cast<double>(n), -beta_s) : s_fixed;
  }
};

struct ScanPoint {
  int n = 0;
  double s_n = 0.0;
  std::string observable;
  double estimate = 0.0;
  double se = 0.0;
  std::size_t draws_lambda = 0;
  std::size_t draws_disorder = 0;
};

struct SeriesStat {
  std::string observable;
  bool decreasing_3se = false;  // strictly decreasing beyond combined 3 se
  bool decreasing = false;      // strictly decreasing point estimates
  double slope = 0.0;           // log-log fit against n
};

struct DecompCheck {
  int n = 0;
  std::string what;  // "q" or "l"
  double total = 0.0, thermal = 0.0, quenched = 0.0, se_comb = 0.0;
  bool ok = false;
};

struct ScalingRun {
  std::string scan;
  std::vector<ScanPoint> points;
  std::vector<SeriesStat> stats;
  std::vector<DecompCheck> decomp;
  double c_f_hat = 0.0;       // max_n n Var(F_n), total scan only
  bool c_f_stable = false;    // within a factor 2 across the grid

  std::vector<const ScanPoint*> series(const std::string& name) const;
  const SeriesStat* stat(const std::string& name) const;
};

// Nested Monte Carlo average over the SNR-matrix ensemble (outer) and the
// disorder (inner); the error is across lambda clusters.
struct LambdaAverage {
  double estimate = 0.0;
  double se = 0.0;
};
LambdaAverage estimate_lambda_average(
    const std::function<double(const DrawContext&)>& functional,
    const ModelTemplate& tmpl, int n, double s_n, const McConfig& cfg);

// Thermal fluctuations of the overlap: E_lambda E<||Q - <Q>||_F^2> and the
// replica-replica gap E_lambda E<||Q - <Q^(12)>||_F^2> across the n grid.
ScalingRun run_thermal_scan(const ModelTemplate& tmpl, const ScanConfig& cfg);

// Total overlap fluctuation E_lambda E<||Q - E<Q>||_F^2> (with its
// thermal/quenched split) plus the free-energy variance n Var(F_n).
ScalingRun run_total_scan(const ModelTemplate& tmpl, const ScanConfig& cfg);

// Thermal and quenched fluctuations of the L matrix.
ScalingRun run_l_scan(const ModelTemplate& tmpl, const ScanConfig& cfg);

// Perturbed-vs-base free energy gap against the bound S^2 (2K+1) K^2 s_n.
struct BoundCheck {
  std::string name;
  int n = 0;
  double value = 0.0;
  double se = 0.0;
  double bound = 0.0;
  bool pass = false;  // |value| <= bound + 3 se
};
BoundCheck check_free_energy_gap(const ModelTemplate& tmpl, int n,
                                 const McConfig& cfg);

}  // namespace olab
