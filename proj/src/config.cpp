#include "olab/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace olab {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.contains(it.key()))
      throw config_error("unknown key '" + it.key() + "' in " + where);
}

template <typename T>
T get_or(const json& obj, const std::string& key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw config_error("bad value for '" + key + "': " + e.what());
  }
}

PriorSpec parse_prior(const json& j, int K) {
  check_keys(j, {"kind", "atoms", "weights"}, "prior");
  const std::string kind = get_or<std::string>(j, "kind", "rademacher");
  if (kind == "rademacher") return PriorSpec::rademacher(K);
  if (kind != "atoms") throw config_error("prior.kind must be rademacher|atoms");
  if (!j.contains("atoms") || !j.contains("weights"))
    throw config_error("prior.kind=atoms requires prior.atoms and prior.weights");
  const auto atoms = j.at("atoms").get<std::vector<std::vector<double>>>();
  const auto weights = j.at("weights").get<std::vector<double>>();
  if (atoms.empty()) throw config_error("prior.atoms must be nonempty");
  Eigen::MatrixXd am(atoms.size(), atoms.front().size());
  for (std::size_t a = 0; a < atoms.size(); ++a) {
    if (static_cast<Eigen::Index>(atoms[a].size()) != am.cols())
      throw config_error("prior.atoms rows must have equal length");
    for (std::size_t k = 0; k < atoms[a].size(); ++k) am(a, k) = atoms[a][k];
  }
  if (am.cols() != K) throw config_error("prior.atoms dimension must equal pert.K");
  Eigen::VectorXd wv(weights.size());
  for (std::size_t a = 0; a < weights.size(); ++a) wv(a) = weights[a];
  try {
    return PriorSpec::from_atoms(am, wv);
  } catch (const invalid_parameter& e) {
    throw config_error(std::string("prior: ") + e.what());
  }
}

BaseChannelSpec parse_base(const json& j) {
  check_keys(j, {"kind", "p", "snr"}, "base");
  const std::string kind = get_or<std::string>(j, "kind", "none");
  const double snr = get_or<double>(j, "snr", 1.0);
  if (kind == "none") return BaseChannelSpec::none();
  if (kind == "spiked-wigner") return BaseChannelSpec::spiked_wigner(snr);
  if (kind == "tensor-p")
    return BaseChannelSpec::tensor(get_or<int>(j, "p", 3), snr);
  throw config_error("base.kind must be none|spiked-wigner|tensor-p");
}

}  // namespace

McConfig ExperimentConfig::mc() const {
  McConfig m;
  m.draws_disorder = run.draws_disorder;
  m.draws_lambda = run.draws_lambda;
  m.sample_lambda = run.sample_lambda || run.draws_lambda > 1;
  m.seed = seed;
  m.tol_z = run.tol_z;
  m.atol = run.atol;
  return m;
}

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw config_error(std::string("config parse failure: ") + e.what());
  }
  if (!j.is_object()) throw config_error("config root must be an object");
  check_keys(j, {"prior", "base", "pert", "gen", "n", "seed", "run", "output"},
             "config root");
  if (!j.contains("pert")) throw config_error("missing section 'pert'");

  const json& pj = j.at("pert");
  check_keys(pj, {"K", "s_n", "matrix_channel"}, "pert");
  const int K = get_or<int>(pj, "K", 1);
  if (K < 1) throw config_error("pert.K >= 1 required");

  ExperimentConfig cfg;
  cfg.model.s_n = get_or<double>(pj, "s_n", 0.5);
  cfg.model.matrix_channel = get_or<bool>(pj, "matrix_channel", true);
  if (cfg.model.matrix_channel && !(cfg.model.s_n > 0.0 && cfg.model.s_n <= 1.0))
    throw config_error("pert.s_n must lie in (0,1]");
  cfg.model.prior =
      j.contains("prior") ? parse_prior(j.at("prior"), K) : PriorSpec::rademacher(K);
  cfg.model.base = j.contains("base") ? parse_base(j.at("base")) : BaseChannelSpec::none();

  if (j.contains("gen")) {
    const json& gj = j.at("gen");
    check_keys(gj, {"p", "lambda_vec", "beta", "average_beta"}, "gen");
    GenTemplate g;
    g.p = get_or<int>(gj, "p", 1);
    if (g.p < 1 || g.p > 3) throw config_error("gen.p must lie in [1,3]");
    auto lv = get_or<std::vector<double>>(gj, "lambda_vec",
                                          std::vector<double>(K, 1.0));
    if (static_cast<int>(lv.size()) != K)
      throw config_error("gen.lambda_vec length must equal pert.K");
    g.lambda_vec.resize(K);
    for (int k = 0; k < K; ++k) {
      if (lv[k] != -1.0 && lv[k] != 0.0 && lv[k] != 1.0)
        throw config_error("gen.lambda_vec entries must be -1, 0 or 1");
      g.lambda_vec(k) = lv[k];
    }
    g.beta = get_or<double>(gj, "beta", 1.5);
    if (g.beta < 1.0 || g.beta > 2.0) throw config_error("gen.beta must lie in [1,2]");
    g.average_beta = get_or<bool>(gj, "average_beta", true);
    cfg.model.gen = g;
  }

  cfg.n = get_or<int>(j, "n", 4);
  if (cfg.n < 1) throw config_error("n >= 1 required");
  if (j.contains("seed")) {
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.seed_given = true;
  }

  if (j.contains("run")) {
    const json& rj = j.at("run");
    check_keys(rj,
               {"mode", "n_grid", "draws_disorder", "draws_lambda",
                "sample_lambda", "chains", "sweeps", "burn_in", "tol_z", "atol",
                "nodes", "beta_s", "gg_arity", "slope_max_q", "slope_max_l",
                "sym_kind", "sym_n_rep", "m_target", "sym_tol"},
               "run");
    RunSection& r = cfg.run;
    r.mode = get_or<std::string>(rj, "mode", r.mode);
    if (r.mode != "exact" && r.mode != "mcmc")
      throw config_error("run.mode must be exact|mcmc");
    r.n_grid = get_or<std::vector<int>>(rj, "n_grid", r.n_grid);
    for (std::size_t i = 1; i < r.n_grid.size(); ++i)
      if (r.n_grid[i] < r.n_grid[i - 1])
        throw config_error("run.n_grid must be nondecreasing");
    r.draws_disorder = get_or<std::size_t>(rj, "draws_disorder", r.draws_disorder);
    r.draws_lambda = get_or<std::size_t>(rj, "draws_lambda", r.draws_lambda);
    r.sample_lambda = get_or<bool>(rj, "sample_lambda", r.sample_lambda);
    r.chains = get_or<int>(rj, "chains", r.chains);
    r.sweeps = get_or<int>(rj, "sweeps", r.sweeps);
    r.burn_in = get_or<int>(rj, "burn_in", r.burn_in);
    r.tol_z = get_or<double>(rj, "tol_z", r.tol_z);
    r.atol = get_or<double>(rj, "atol", r.atol);
    r.nodes = get_or<int>(rj, "nodes", r.nodes);
    r.beta_s = get_or<double>(rj, "beta_s", r.beta_s);
    r.gg_arity = get_or<int>(rj, "gg_arity", r.gg_arity);
    r.slope_max_q = get_or<double>(rj, "slope_max_q", r.slope_max_q);
    r.slope_max_l = get_or<double>(rj, "slope_max_l", r.slope_max_l);
    r.sym_kind = get_or<std::string>(rj, "sym_kind", r.sym_kind);
    r.sym_n_rep = get_or<std::vector<int>>(rj, "sym_n_rep", r.sym_n_rep);
    r.m_target = get_or<int>(rj, "m_target", r.m_target);
    r.sym_tol = get_or<double>(rj, "sym_tol", r.sym_tol);
  }

  if (j.contains("output")) {
    const json& oj = j.at("output");
    check_keys(oj, {"dir", "formats"}, "output");
    cfg.output.dir = get_or<std::string>(oj, "dir", cfg.output.dir);
    cfg.output.formats =
        get_or<std::vector<std::string>>(oj, "formats", cfg.output.formats);
    for (const auto& f : cfg.output.formats)
      if (f != "csv" && f != "jsonl")
        throw config_error("output.formats entries must be csv|jsonl");
  }

  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_digest(const ExperimentConfig& cfg) {
  // canonical re-serialization, then FNV-1a
  std::ostringstream canon;
  canon.precision(17);
  canon << "K=" << cfg.model.dim() << ";s_n=" << cfg.model.s_n
        << ";mat=" << cfg.model.matrix_channel << ";prior=";
  for (int a = 0; a < cfg.model.prior.num_atoms(); ++a) {
    for (int k = 0; k < cfg.model.prior.dim(); ++k)
      canon << cfg.model.prior.atoms(a, k) << ",";
    canon << cfg.model.prior.weights(a) << "|";
  }
  canon << ";base=" << static_cast<int>(cfg.model.base.kind) << ","
        << cfg.model.base.p << "," << cfg.model.base.snr;
  if (cfg.model.gen) {
    canon << ";gen=" << cfg.model.gen->p << "," << cfg.model.gen->beta << ","
          << cfg.model.gen->average_beta << ",";
    for (int k = 0; k < cfg.model.gen->lambda_vec.size(); ++k)
      canon << cfg.model.gen->lambda_vec(k) << ",";
  }
  canon << ";n=" << cfg.n << ";seed=" << cfg.seed << ";mode=" << cfg.run.mode
        << ";grid=";
  for (int n : cfg.grid()) canon << n << ",";
  canon << ";dd=" << cfg.run.draws_disorder << ";dl=" << cfg.run.draws_lambda
        << ";sl=" << cfg.run.sample_lambda << ";ch=" << cfg.run.chains << ","
        << cfg.run.sweeps << "," << cfg.run.burn_in << ";tz=" << cfg.run.tol_z
        << ";at=" << cfg.run.atol << ";nodes=" << cfg.run.nodes
        << ";bs=" << cfg.run.beta_s << ";A=" << cfg.run.gg_arity
        << ";sq=" << cfg.run.slope_max_q << ";sm=" << cfg.run.slope_max_l
        << ";sym=" << cfg.run.sym_kind << "," << cfg.run.m_target << ","
        << cfg.run.sym_tol << ";srep=";
  for (int n : cfg.run.sym_n_rep) canon << n << ",";

  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : canon.str()) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  std::ostringstream hex;
  hex << std::hex << h;
  return hex.str();
}

}  // namespace olab
