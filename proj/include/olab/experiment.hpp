#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <span>

#include "olab/model.hpp"
#include "olab/posterior.hpp"

namespace olab {

// Generalized-channel parameters before gamma = s_n * beta is fixed. beta is
// either held fixed or drawn uniformly from [1,2] per disorder draw.
struct GenTemplate {
  int p = 1;
  Eigen::VectorXd lambda_vec;
  double beta = 1.5;
  bool average_beta = true;
};

// A model family parametrized by n; lambda and beta are drawn per MC block.
struct ModelTemplate {
  PriorSpec prior;
  BaseChannelSpec base = BaseChannelSpec::none();
  double s_n = 0.5;
  bool matrix_channel = true;  // include the side channel Y = X sqrt(lambda) + Z
  std::optional<GenTemplate> gen;

  int dim() const { return prior.dim(); }

  SnrMatrix fixed_lambda() const;           // midpoint representative (or zero)
  SnrMatrix draw_lambda(Rng& rng) const;    // uniform over the ensemble
  ModelSpec instantiate(int n, const SnrMatrix& lambda, double beta) const;
};

struct McConfig {
  std::size_t draws_lambda = 1;    // outer blocks; 1 with sample_lambda=false
  std::size_t draws_disorder = 1000;
  bool sample_lambda = false;      // false: fixed midpoint lambda in every block
  std::uint64_t seed = 1;
  int jobs = 1;
  double tol_z = 3.0;
  double atol = 1e-8;
};

// One Monte Carlo draw handed to a kernel: everything needed to evaluate
// per-draw statistics with exact inner brackets.
struct DrawContext {
  const ModelSpec& model;
  const DisorderSample& disorder;
  const ExactPosterior& posterior;
  std::size_t lambda_index;
  std::size_t disorder_index;
};

using DrawKernel = std::function<void(const DrawContext&, std::span<double> row)>;

// Runs draws_lambda x draws_disorder independent draws and collects ncols
// statistics per draw. Streams are derived from (seed, n, block, draw), so
// the table is identical for any job count and every grid n uses an
// independent stream (shapes differ across n, ruling out common random
// numbers). Row order: lambda-major.
Eigen::MatrixXd mc_table(const ModelTemplate& tmpl, int n, const McConfig& cfg,
                         int ncols, const DrawKernel& kernel);

// Estimate and jackknife standard error of a smooth function of the column
// means of a sample table.
struct JackknifeResult {
  double estimate = 0.0;
  double se = 0.0;
};
JackknifeResult jackknife(const Eigen::MatrixXd& table,
                          const std::function<double(const Eigen::VectorXd&)>& fn);

}  // namespace olab
