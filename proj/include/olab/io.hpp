#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "olab/identities.hpp"
#include "olab/scaling.hpp"
#include "olab/symmetry.hpp"

namespace olab {

// shortest-exact decimal rendering, stable across runs
std::string format_double(double v);

void write_text_file(const std::string& path, const std::string& content);

std::string identity_report_jsonl(const std::vector<IdentityReport>& reports);
std::string scan_points_csv(const std::vector<ScanPoint>& points);
std::string scan_summary_jsonl(const ScalingRun& run,
                               const std::vector<BoundCheck>& bounds = {});
std::string fluct_points_csv(const FluctReport& report);
std::string gibbs_diag_csv(const std::vector<GibbsDiagnostics>& diags,
                           const std::string& mode);
std::string tournament_reports_json(const std::vector<TournamentReport>& reports);

struct Manifest {
  std::string subcommand;
  std::string config_digest;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string version;
  std::int64_t started_at_ms = 0;  // timestamps are the only run-varying fields
  std::int64_t wall_ms = 0;
  std::vector<std::string> outputs;
  bool ok = false;
};

std::string manifest_json(const Manifest& m);

}  // namespace olab
