#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "subord/criteria.hpp"

namespace subord {

struct TGridSpec {
  double t_min = 1e-3;
  double t_max = 1e-1;
  int per_decade = 8;

  std::vector<double> values() const;
};

struct PsiEntry {
  std::string name;  // directory name under traces/ and densities/
  std::string spec;
  std::vector<std::string> criteria;  // empty: the run-level list
  std::optional<Theorem4Params> theorem4;
  std::optional<double> p;
};

struct RunConfig {
  std::vector<PsiEntry> psis;
  TGridSpec t_grid;
  std::vector<std::string> criteria = {"theorem2"};
  std::optional<double> p;  // unset: 2 when the p rule allows it, else the rule
  double slope_slack = 0.1;
  double r2_min = 0.98;
  double representation_tol = 1e-6;
  double laplace_tol = 1e-5;
  double operator_tol = 1e-5;
  double probe_growth = 1.3;
  std::vector<double> density_t = {1.0};
  std::vector<double> shift_steps = {0.1, 0.05, 0.025, 0.0125};
  std::vector<int> shift_sizes;  // empty: ceil(3.2 / h) per step
  /// Optional diagonal probe member: eigenvalues -10^x, x uniform in
  /// [-log10|lambda_min|, log10|lambda_min|].
  std::optional<std::pair<double, int>> diag;
  double probe_t = 0.1;
  int random_count = 10;
  int random_size = 5;
  std::vector<double> operator_t = {0.1, 1.0};
  QuadratureSpec quadrature;  // theorem5 keeps its own tail cap
  InversionParams inversion;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";
};

/// Criterion names accepted in configs and on the command line.
const std::vector<std::string>& known_criteria();

/// INI text. Sections: [run], [crit], [family], [quad], [nu], one
/// [psi:<name>] per function.
/// Relative output paths resolve against `base_dir`. ConfigParseError on any
/// unknown key, bad value, or an empty psi list.
RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = ".");
RunConfig load_config(const std::filesystem::path& path);
/// The range and name checks parse_config applies; ConfigParseError.
void validate_config(const RunConfig& config);

/// Filesystem-safe name for a catalog spec.
std::string sanitize_name(std::string_view spec);

struct RunReport {
  nlohmann::json json;
  bool complete = true;
  std::vector<CriterionReport> reports;  // psi-major, criterion-minor
};

/// Evaluates every (psi, criterion) pair on a pool of SUBORD_WORKERS threads
/// and writes report.json, traces/<psi>/<criterion>.csv and
/// densities/<psi>/nu_t_<t>.csv under the output directory.
RunReport run(const RunConfig& config);
RunReport run(const std::filesystem::path& config_path);

/// Worker count from SUBORD_WORKERS, else the hardware concurrency.
unsigned worker_count();

std::string list_catalog();

void write_trace_csv(std::ostream& out, const CriterionReport& report);

}  // namespace subord
