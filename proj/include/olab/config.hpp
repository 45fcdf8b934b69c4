#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "olab/experiment.hpp"

namespace olab {

struct RunSection {
  std::string mode = "exact";  // exact | mcmc
  std::vector<int> n_grid;     // defaults to {n} when empty
  std::size_t draws_disorder = 1000;
  std::size_t draws_lambda = 1;
  bool sample_lambda = false;
  int chains = 64;
  int sweeps = 200;
  int burn_in = 100;
  double tol_z = 3.0;
  double atol = 1e-8;
  int nodes = 16;       // quadrature order for exact-mode identities
  double beta_s = 0.0;  // s_n = n^{-beta_s} schedule when > 0
  int gg_arity = 1;     // A in the multi-replica identity
  double slope_max_q = -0.25;
  double slope_max_l = -0.5;
  // symmetry subcommand
  std::string sym_kind = "gram";  // constant | exact | gram | sampled
  std::vector<int> sym_n_rep = {8, 16, 32};
  int m_target = 4;
  double sym_tol = 1e-6;
};

struct OutputSection {
  std::string dir = "out";
  std::vector<std::string> formats = {"csv", "jsonl"};
};

struct ExperimentConfig {
  ModelTemplate model;
  int n = 4;
  std::uint64_t seed = 1;
  bool seed_given = false;
  RunSection run;
  OutputSection output;

  std::vector<int> grid() const {
    return run.n_grid.empty() ? std::vector<int>{n} : run.n_grid;
  }
  McConfig mc() const;
};

ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& json_text);

// Stable digest of the parsed config (for the run manifest).
std::string config_digest(const ExperimentConfig& cfg);

}  // namespace olab
