#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "subord/bernstein.hpp"
#include "subord/cli_report.hpp"
#include "subord/error.hpp"

namespace {

int summarize(const subord::RunReport& report, const subord::RunConfig& cfg) {
  for (const auto& r : report.reports) {
    std::cout << r.psi << '\t' << r.id << '\t' << subord::to_string(r.verdict);
    if (!r.route.empty()) std::cout << '\t' << r.route;
    if (r.fit) std::cout << "\tslope=" << r.fit->slope << " r2=" << r.fit->r2;
    std::cout << '\n';
  }
  std::cout << "report: " << (cfg.output_dir / "report.json").string() << '\n';
  if (!report.complete) {
    for (const auto& f : report.json["failures"]) std::cerr << "error: " << f.get<std::string>() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Subordination and T_Y criteria workbench"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Evaluate a configuration file");
  run->add_option("config", config_path, "INI configuration")->required();

  app.add_subcommand("list-catalog", "List catalog entries and their closed forms");

  std::string spec, criteria = "theorem2", out = "out";
  double t_min = 1e-3, t_max = 1e-1;
  int per_decade = 8;
  std::uint64_t seed = 0;
  auto* check = app.add_subcommand("check", "Evaluate criteria for one function");
  check->add_option("psi", spec, "catalog spec, e.g. frac(0.5,0)")->required();
  check->add_option("--criteria", criteria, "comma-separated criteria")->capture_default_str();
  check->add_option("--t-min", t_min)->capture_default_str();
  check->add_option("--t-max", t_max)->capture_default_str();
  check->add_option("--per-decade", per_decade)->capture_default_str();
  check->add_option("--seed", seed)->capture_default_str();
  check->add_option("--out", out, "output directory")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("list-catalog")) {
      std::cout << subord::list_catalog();
      return 0;
    }
    subord::RunConfig cfg;
    if (app.got_subcommand("run")) {
      cfg = subord::load_config(config_path);
    } else {
      cfg.output_dir = out;
      cfg.seed = seed;
      cfg.t_grid = {t_min, t_max, per_decade};
      cfg.criteria.clear();
      std::stringstream list(criteria);
      for (std::string c; std::getline(list, c, ',');) {
        if (!c.empty()) cfg.criteria.push_back(c);
      }
      subord::PsiEntry e;
      e.spec = spec;
      e.name = subord::sanitize_name(spec);
      cfg.psis = {e};
      subord::validate_config(cfg);
    }
    return summarize(subord::run(cfg), cfg);
  } catch (const subord::Error& e) {
    std::cerr << e.what() << '\n';
    return 2;
  }
}
