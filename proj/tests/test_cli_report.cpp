#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "subord/cli_report.hpp"
#include "subord/error.hpp"

using namespace subord;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("subord_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

ErrorCode parse_error(const std::string& text) {
  std::istringstream in(text);
  try {
    parse_config(in);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::IoError;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("config: parsing and validation") {
  std::istringstream in(R"(
[run]
output = results
seed = 11
criteria = theorem2, theorem5
density_t = 0.5, 1

[crit]
t_min = 1e-3
t_max = 1e-1
t_per_decade = 4
slope_slack = 0.2

[family]
shift = 0.1, 0.05
random = 3

[psi:half]
spec = frac(0.5,0)
alpha = 0.5
gamma = 0.5

[psi:log1]
spec = log(1)
criteria = theorem5
)");
  const auto cfg = parse_config(in, "/base");
  CHECK(cfg.seed == 11);
  CHECK(cfg.output_dir == fs::path("/base/results"));
  CHECK(cfg.criteria == std::vector<std::string>{"theorem2", "theorem5"});
  CHECK(cfg.t_grid.values().size() == 9);
  CHECK(cfg.t_grid.values().front() == doctest::Approx(1e-3));
  CHECK(cfg.t_grid.values().back() == doctest::Approx(1e-1));
  CHECK(cfg.slope_slack == 0.2);
  CHECK(cfg.shift_steps.size() == 2);
  CHECK(cfg.random_count == 3);
  REQUIRE(cfg.psis.size() == 2);
  CHECK(cfg.psis[0].theorem4->alpha == 0.5);
  CHECK_FALSE(cfg.psis[0].theorem4->delta);
  CHECK(cfg.psis[1].criteria == std::vector<std::string>{"theorem5"});

  CHECK(parse_error("[run]\nseed = 1\n") == ErrorCode::ConfigParseError);
  CHECK(parse_error("[psi:a]\nspec = frac(0.5,0)\ncolour = red\n") == ErrorCode::ConfigParseError);
  CHECK(parse_error("[psi:a]\nspec = frac(2,0)\n") == ErrorCode::ConfigParseError);
  CHECK(parse_error("[run]\ncriteria = theorem9\n[psi:a]\nspec = log(1)\n") ==
        ErrorCode::ConfigParseError);
  CHECK(parse_error("[crit]\nt_min = 1\nt_max = 0.1\n[psi:a]\nspec = log(1)\n") ==
        ErrorCode::ConfigParseError);
  CHECK(parse_error("[crit]\nt_min = abc\n[psi:a]\nspec = log(1)\n") ==
        ErrorCode::ConfigParseError);

  std::istringstream extra(
      "[quad]\ntail_cap = 1e6\ntol_rel = 1e-9\n[nu]\ngrid_size = 131072\nr_max = 16\n"
      "[family]\nshift = 0.1, 0.05\nshift_n = 20, 40\ndiag = -1e4, 41\n"
      "[psi:a]\nspec = log(1)\n");
  const auto cfg2 = parse_config(extra);
  CHECK(cfg2.quadrature.tail_cap == 1e6);
  CHECK(cfg2.quadrature.tol_rel == 1e-9);
  CHECK(cfg2.inversion.grid_size == 131072);
  CHECK(cfg2.inversion.r_max == 16.0);
  CHECK(cfg2.shift_sizes == std::vector<int>{20, 40});
  CHECK(cfg2.diag->second == 41);
  CHECK(parse_error("[nu]\ngrid_size = 4096\n[psi:a]\nspec = log(1)\n") ==
        ErrorCode::ConfigParseError);
  CHECK(parse_error("[family]\nshift = 0.1, 0.05\nshift_n = 20\n[psi:a]\nspec = log(1)\n") ==
        ErrorCode::ConfigParseError);

  RunConfig empty;
  CHECK_THROWS_AS(run(empty), Error);
}

TEST_CASE("catalog listing") {
  const std::string text = list_catalog();
  CHECK(text.find("log(b): rho=exp(-b u), nu_t=Gamma(t,b)") != std::string::npos);
  CHECK(text.find("acosh(1): rho=exp(-u) I0(u), nu_t=t r^{-1} e^{-r} I_t(r)") != std::string::npos);
  const auto frac_line = text.substr(text.find("frac(alpha,c):"));
  CHECK(frac_line.substr(0, frac_line.find('\n')).find("alpha in (0,1)") != std::string::npos);
  CHECK(list_catalog() == text);
}

TEST_CASE("run: report layout, route selection and determinism") {
  const fs::path root = scratch("run");
  auto config_text = [](const fs::path& out) {
    return "[run]\noutput = " + out.string() +
           "\nseed = 3\ncriteria = theorem5, theorem2\ndensity_t = 1\n"
           "[crit]\nt_min = 1e-2\nt_max = 1e-1\nt_per_decade = 5\n"
           "[psi:log1]\nspec = log(1)\n"
           "[psi:half]\nspec = frac(0.5,0)\ncriteria = theorem2, subordination\n";
  };
  RunReport first, second;
  for (int k = 0; k < 2; ++k) {
    const fs::path cfg_path = root / ("run" + std::to_string(k) + ".ini");
    std::ofstream(cfg_path) << config_text(root / ("out" + std::to_string(k)));
    (k ? second : first) = run(cfg_path);
  }
  CHECK(first.complete);
  REQUIRE(first.reports.size() == 4);
  CHECK(first.json["psi"][0]["criteria"].size() == 2);
  CHECK(first.json["psi"][1]["criteria"].size() == 2);

  const auto& log_t2 = first.json["psi"][0]["criteria"][1];
  CHECK(log_t2["id"] == "theorem2");
  CHECK(log_t2["verdict"] == "pass");
  CHECK(log_t2["route"] == "theorem5");
  CHECK(first.json["psi"][0]["criteria"][0]["verdict"] == "pass");
  const auto& half_t2 = first.json["psi"][1]["criteria"][0];
  CHECK(half_t2["route"] == "fourier");
  CHECK(half_t2["fit"]["slope"].get<double>() == doctest::Approx(-1.0).epsilon(0.05));

  for (const char* rel : {"traces/log1/theorem5.csv", "traces/log1/theorem2.csv",
                          "traces/half/theorem2.csv", "traces/half/subordination.csv",
                          "densities/log1/nu_t_1.csv", "densities/half/nu_t_1.csv"}) {
    CAPTURE(rel);
    const std::string a = slurp(root / "out0" / rel);
    CHECK_FALSE(a.empty());
    CHECK(a == slurp(root / "out1" / rel));
  }
  CHECK(slurp(root / "out0/traces/half/theorem2.csv").rfind("t,", 0) == 0);
  CHECK(fs::exists(root / "out0/report.json"));
  CHECK_FALSE(fs::exists(root / "out0/incomplete"));
  for (std::size_t k = 0; k < first.reports.size(); ++k) {
    CHECK(first.reports[k].verdict == second.reports[k].verdict);
  }
}

TEST_CASE("run: worker count does not change traces") {
  const fs::path root = scratch("workers");
  std::string outputs[2];
  for (int k = 0; k < 2; ++k) {
    ::setenv("SUBORD_WORKERS", k ? "3" : "1", 1);
    CHECK(worker_count() == (k ? 3u : 1u));
    std::istringstream in("[run]\noutput = " + (root / std::to_string(k)).string() +
                          "\ncriteria = representation, subordination\ndensity_t = 0.5\n"
                          "[psi:a]\nspec = frac(0.3,0)\n[psi:b]\nspec = acosh(1)\n");
    const auto report = run(parse_config(in));
    CHECK(report.complete);
    outputs[k] = slurp(root / std::to_string(k) / "traces/a/representation.csv") +
                 slurp(root / std::to_string(k) / "traces/b/subordination.csv") +
                 slurp(root / std::to_string(k) / "densities/a/nu_t_0.5.csv");
  }
  ::unsetenv("SUBORD_WORKERS");
  CHECK(outputs[0].size() > 100);
  CHECK(outputs[0] == outputs[1]);
  ::setenv("SUBORD_WORKERS", "0", 1);
  CHECK_THROWS_AS(worker_count(), Error);
  ::unsetenv("SUBORD_WORKERS");
}

TEST_CASE("run: probe over shift and diagonal members") {
  const fs::path root = scratch("probe");
  std::istringstream in("[run]\noutput = " + root.string() +
                        "\ncriteria = probe\ndensity_t = 1\n"
                        "[family]\nshift = 0.1, 0.05\ndiag = -1e4, 41\n"
                        "[psi:half]\nspec = frac(0.5,0)\n[psi:id]\nspec = custom(a0=1)\n");
  const auto report = run(parse_config(in));
  REQUIRE(report.reports.size() == 2);
  const auto& half = report.reports[0];
  CHECK(half.verdict == Verdict::Pass);
  CHECK(half.trace.size() == 3);
  // sup over x > 0 of x e^{-x}
  CHECK(half.constants.at("diag_value") == doctest::Approx(std::exp(-1.0)).epsilon(2e-2));
  CHECK(report.reports[1].verdict == Verdict::Fail);
  CHECK(report.reports[1].constants.at("min_ratio") >= 1.3);
}
