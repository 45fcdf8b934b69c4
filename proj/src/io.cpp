#include "olab/io.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>

namespace olab {

using ordered_json = nlohmann::ordered_json;

std::string format_double(double v) {
  // nlohmann emits shortest round-trip decimals; reuse that for CSV too
  return ordered_json(v).dump();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw config_error("cannot write output file: " + path);
  out << content;
}

namespace {

ordered_json report_json(const IdentityReport& r) {
  ordered_json j;
  j["name"] = r.name;
  j["n"] = r.n;
  j["lhs"] = r.lhs;
  j["rhs"] = r.rhs;
  j["se"] = r.se;
  j["zscore"] = std::isfinite(r.zscore) ? r.zscore : -1.0;
  j["pass"] = r.pass;
  j["samples"] = r.samples;
  j["z_max"] = r.z_max;
  j["atol"] = r.atol;
  return j;
}

}  // namespace

std::string identity_report_jsonl(const std::vector<IdentityReport>& reports) {
  std::string out;
  for (const auto& r : reports) {
    out += report_json(r).dump();
    out += "\n";
  }
  return out;
}

std::string scan_points_csv(const std::vector<ScanPoint>& points) {
  std::string out = "n,s_n,observable,estimate,se,draws_lambda,draws_disorder\n";
  for (const auto& p : points) {
    out += std::to_string(p.n) + "," + format_double(p.s_n) + "," + p.observable +
           "," + format_double(p.estimate) + "," + format_double(p.se) + "," +
           std::to_string(p.draws_lambda) + "," + std::to_string(p.draws_disorder) +
           "\n";
  }
  return out;
}

std::string scan_summary_jsonl(const ScalingRun& run,
                               const std::vector<BoundCheck>& bounds) {
  std::string out;
  for (const auto& s : run.stats) {
    ordered_json j;
    j["record"] = "series";
    j["scan"] = run.scan;
    j["observable"] = s.observable;
    j["decreasing"] = s.decreasing;
    j["decreasing_3se"] = s.decreasing_3se;
    j["slope"] = s.slope;
    out += j.dump() + "\n";
  }
  for (const auto& d : run.decomp) {
    ordered_json j;
    j["record"] = "decomposition";
    j["scan"] = run.scan;
    j["what"] = d.what;
    j["n"] = d.n;
    j["total"] = d.total;
    j["thermal"] = d.thermal;
    j["quenched"] = d.quenched;
    j["se_comb"] = d.se_comb;
    j["ok"] = d.ok;
    out += j.dump() + "\n";
  }
  if (run.scan == "total") {
    ordered_json j;
    j["record"] = "free_energy";
    j["c_f_hat"] = run.c_f_hat;
    j["stable_factor2"] = run.c_f_stable;
    out += j.dump() + "\n";
  }
  for (const auto& b : bounds) {
    ordered_json j;
    j["record"] = "bound";
    j["name"] = b.name;
    j["n"] = b.n;
    j["value"] = b.value;
    j["se"] = b.se;
    j["bound"] = b.bound;
    j["pass"] = b.pass;
    out += j.dump() + "\n";
  }
  {
    ordered_json j;
    j["record"] = "note";
    j["text"] =
        "slope fits at desk-scale n are indicative; the asymptotic rates "
        "require s_n -> 0 with s_n^4 n -> infinity";
    out += j.dump() + "\n";
  }
  return out;
}

std::string fluct_points_csv(const FluctReport& report) {
  std::string out =
      "n,thermal,thermal_se,quenched,quenched_se,total,total_se,brace_sum,"
      "brace_sum_se,cross_lhs,cross_rhs,cross_se,cross_pass\n";
  for (const auto& p : report.points) {
    out += std::to_string(p.n) + "," + format_double(p.thermal) + "," +
           format_double(p.thermal_se) + "," + format_double(p.quenched) + "," +
           format_double(p.quenched_se) + "," + format_double(p.total) + "," +
           format_double(p.total_se) + "," + format_double(p.brace_sum) + "," +
           format_double(p.brace_sum_se) + "," + format_double(p.cross.lhs) +
           "," + format_double(p.cross.rhs) + "," + format_double(p.cross.se) +
           "," + (p.cross.pass ? "1" : "0") + "\n";
  }
  return out;
}

std::string gibbs_diag_csv(const std::vector<GibbsDiagnostics>& diags,
                           const std::string& mode) {
  std::string out = "mode,chains,sweeps,rhat_max\n";
  double rhat_max = 0.0;
  int chains = 0, sweeps = 0;
  for (const auto& d : diags) {
    rhat_max = std::max(rhat_max, d.rhat);
    chains = d.chains;
    sweeps = d.sweeps;
  }
  out += mode + "," + std::to_string(chains) + "," + std::to_string(sweeps) +
         "," + format_double(rhat_max) + "\n";
  return out;
}

std::string tournament_reports_json(const std::vector<TournamentReport>& reports) {
  ordered_json arr = ordered_json::array();
  for (const auto& r : reports) {
    ordered_json j;
    j["n_rep"] = r.orientation.n_rep;
    j["k"] = r.k + 1;
    j["kp"] = r.kp + 1;
    j["a"] = r.constants.a;
    j["d"] = r.constants.d;
    j["x"] = r.constants.x;
    j["y"] = r.constants.y;
    j["max_dev"] = r.constants.max_dev;
    j["b"] = r.b;
    j["c"] = r.c;
    j["m"] = r.subsets.m;
    j["exhaustive"] = r.subsets.exhaustive;
    j["v1"] = r.subsets.v1;
    j["v2"] = r.subsets.v2;
    j["gap_u"] = r.gap_u;
    j["gap_w"] = r.gap_w;
    j["gap_u_bound"] = r.gap_u_bound;
    j["gap_w_bound"] = r.gap_w_bound;
    j["cross_gap"] = r.cross_gap;
    j["self_overlap_max"] = r.self_overlap_max;
    j["tol"] = r.tol;
    j["verdict_b_equals_c"] = r.verdict;
    arr.push_back(j);
  }
  return arr.dump(2) + "\n";
}

std::string manifest_json(const Manifest& m) {
  ordered_json j;
  j["subcommand"] = m.subcommand;
  j["config_digest"] = m.config_digest;
  j["seed"] = m.seed;
  j["jobs"] = m.jobs;
  j["version"] = m.version;
  j["started_at_ms"] = m.started_at_ms;
  j["wall_ms"] = m.wall_ms;
  j["outputs"] = m.outputs;
  j["ok"] = m.ok;
  return j.dump(2) + "\n";
}

}  // namespace olab
