#include "subord/cli_report.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "subord/bernstein.hpp"
#include "subord/error.hpp"
#include "subord/levy_quadrature.hpp"
#include "subord/operator_calc.hpp"
#include "subord/subordination.hpp"

namespace subord {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr const char* kVersion = "1.0.0";

[[noreturn]] void config_error(const std::string& what) {
  throw Error(ErrorCode::ConfigParseError, what);
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || end != s.data() + s.size() || !std::isfinite(v)) {
    config_error(key + ": not a number: '" + text + "'");
  }
  return v;
}

long long parse_int(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  long long v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || end != s.data() + s.size()) {
    config_error(key + ": not an integer: '" + text + "'");
  }
  return v;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> parse_doubles(const std::string& key, const std::string& text) {
  std::vector<double> out;
  for (const auto& s : split_list(text)) out.push_back(parse_double(key, s));
  if (out.empty()) config_error(key + ": empty list");
  return out;
}

std::vector<std::string> parse_criteria(const std::string& key, const std::string& text) {
  auto names = split_list(text);
  if (names.empty()) config_error(key + ": empty criteria list");
  const auto& known = known_criteria();
  std::set<std::string> seen;
  for (const auto& n : names) {
    if (std::find(known.begin(), known.end(), n) == known.end()) {
      config_error(key + ": unknown criterion '" + n + "'");
    }
    if (!seen.insert(n).second) config_error(key + ": criterion '" + n + "' listed twice");
  }
  return names;
}

std::vector<double> geometric(double lo, double hi, int n) {
  std::vector<double> g(n);
  for (int k = 0; k < n; ++k) g[k] = lo * std::pow(hi / lo, k / double(n - 1));
  return g;
}

bool is_result_error(ErrorCode c) {
  switch (c) {
    case ErrorCode::Inapplicable:
    case ErrorCode::Undecidable:
    case ErrorCode::NoDecay:
    case ErrorCode::NonDecayingSymbol:
    case ErrorCode::NoClosedForm:
    case ErrorCode::NotSectorial:
    case ErrorCode::LowerBoundFails:
    case ErrorCode::UpperBoundFails:
    case ErrorCode::WindowViolated:
    case ErrorCode::BoundFails:
    case ErrorCode::Divergent:
    case ErrorCode::NotBounded:
    case ErrorCode::IllConditionedEigenbasis:
    case ErrorCode::AtomLimitUndefined:
      return true;
    default:
      return false;
  }
}

std::string t_label(double t) { return format_number(t); }

// ---- criteria not covered by the criteria module ----

CriterionReport representation_report(const BernsteinFunction& psi, const RunConfig& cfg) {
  CriterionReport r;
  r.id = "representation";
  r.psi = psi.spec();
  r.route = "quadrature";
  r.settings["tol"] = cfg.representation_tol;
  r.trace_columns = {"s", "residual"};
  double worst = 0.0;
  for (double a : geometric(0.01, 10.0, 20)) {
    const double s = -a;
    const double res = verify_representation(psi, std::span<const double>(&s, 1), cfg.quadrature);
    r.trace.push_back({s, res});
    worst = std::max(worst, res);
  }
  std::reverse(r.trace.begin(), r.trace.end());
  r.constants["max_residual"] = worst;
  r.verdict = worst <= cfg.representation_tol ? Verdict::Pass : Verdict::Fail;
  return r;
}

CriterionReport subordination_report(const BernsteinFunction& psi, const RunConfig& cfg) {
  CriterionReport r;
  r.id = "subordination";
  r.psi = psi.spec();
  r.settings["tol"] = cfg.laplace_tol;
  r.trace_columns = {"t", "laplace_residual", "mass"};
  std::vector<double> s_grid;
  for (double a : geometric(0.01, 10.0, 20)) s_grid.push_back(-a);
  double worst = 0.0, mass_dev = 0.0;
  for (double t : cfg.density_t) {
    const auto nu = subordination_measure(psi, t, cfg.inversion);
    if (r.route.empty()) {
      r.route = nu.repr() == SubordinationMeasure::Repr::GridDensity ? "fourier" : "closed_form";
    }
    const double res = laplace_check(nu, psi, s_grid, cfg.quadrature);
    const double mass = nu.mass();
    r.trace.push_back({t, res, mass});
    worst = std::max(worst, res);
    mass_dev = std::max(mass_dev, std::abs(mass - 1.0));
  }
  r.constants["max_laplace_residual"] = worst;
  r.constants["max_mass_deviation"] = mass_dev;
  r.verdict = worst <= cfg.laplace_tol && mass_dev <= cfg.laplace_tol ? Verdict::Pass : Verdict::Fail;
  return r;
}

double dist(const CMat& a, const CMat& b) { return op_norm(a - b); }

std::vector<MatrixGenerator> random_family(const RunConfig& cfg) {
  std::vector<MatrixGenerator> out;
  for (int k = 0; k < cfg.random_count; ++k) {
    out.push_back(random_diagonalizable(cfg.random_size, cfg.seed + static_cast<std::uint64_t>(k)));
  }
  return out;
}

CriterionReport multiplication_report(const BernsteinFunction& psi, const RunConfig& cfg) {
  CriterionReport r;
  r.id = "multiplication";
  r.psi = psi.spec();
  r.route = "random_diagonalizable";
  r.settings["tol"] = cfg.operator_tol;
  r.settings["size"] = cfg.random_size;
  r.trace_columns = {"t", "member", "residual"};
  double worst = 0.0;
  const auto family = random_family(cfg);
  for (double t : cfg.operator_t) {
    for (std::size_t k = 0; k < family.size(); ++k) {
      const double res = multiplication_rule_residual(psi, family[k], t, cfg.quadrature, cfg.inversion);
      r.trace.push_back({t, double(k), res});
      worst = std::max(worst, res);
    }
  }
  r.constants["max_residual"] = worst;
  r.verdict = worst <= cfg.operator_tol ? Verdict::Pass : Verdict::Fail;
  return r;
}

CriterionReport oracle_report(const BernsteinFunction& psi, const RunConfig& cfg) {
  CriterionReport r;
  r.id = "oracle";
  r.psi = psi.spec();
  r.route = "spectral";
  r.settings["tol"] = cfg.operator_tol;
  r.trace_columns = {"t", "member", "psi_residual", "semigroup_residual"};
  double worst = 0.0;
  const auto family = random_family(cfg);
  std::vector<double> psi_res;
  for (const auto& gen : family) {
    psi_res.push_back(
        dist(apply_psi_generator(psi, gen, cfg.quadrature), spectral_oracle(psi, gen, 0.0, SpectralMode::Psi)));
  }
  for (double t : cfg.operator_t) {
    for (std::size_t k = 0; k < family.size(); ++k) {
      const double g = dist(subordinate_at(psi, family[k], t, cfg.inversion, cfg.quadrature),
                            spectral_oracle(psi, family[k], t, SpectralMode::Semigroup));
      r.trace.push_back({t, double(k), psi_res[k], g});
      worst = std::max({worst, psi_res[k], g});
    }
  }
  r.constants["max_residual"] = worst;
  r.verdict = worst <= cfg.operator_tol ? Verdict::Pass : Verdict::Fail;
  return r;
}

CriterionReport probe_report(const BernsteinFunction& psi, const RunConfig& cfg) {
  CriterionReport r;
  r.id = "probe";
  r.psi = psi.spec();
  r.route = "discrete_shift";
  r.settings["growth_threshold"] = cfg.probe_growth;
  r.settings["t"] = cfg.probe_t;
  r.trace_columns = {"t", "h", "n", "value"};
  r.notes.emplace_back("l2 surrogate family (operator 2-norm), evidence rather than proof");
  std::vector<MatrixGenerator> family;
  for (std::size_t k = 0; k < cfg.shift_steps.size(); ++k) {
    const double h = cfg.shift_steps[k];
    const auto n = cfg.shift_sizes.empty() ? static_cast<Eigen::Index>(std::ceil(3.2 / h))
                                           : static_cast<Eigen::Index>(cfg.shift_sizes[k]);
    family.push_back(discrete_shift_generator(n, h));
  }
  QuadratureSpec spec = cfg.quadrature;
  if (cfg.diag) {
    const auto [lambda_min, count] = *cfg.diag;
    const double top = std::log10(-lambda_min);
    Eigen::VectorXcd eig(count);
    for (int k = 0; k < count; ++k) eig[k] = -std::pow(10.0, -top + 2.0 * top * k / (count - 1));
    family.push_back(MatrixGenerator::diagonal(eig, "diag"));
    // tail cutoff at 40 decay lengths of the slowest mode
    spec.tail_cap = std::max(spec.tail_cap, std::exp2(std::ceil(std::log2(40.0 * -lambda_min))));
  }
  const auto probe = property_Y_probe(psi, family, {cfg.probe_t}, cfg.inversion, spec);
  std::vector<double> vals;
  for (std::size_t k = 0; k < cfg.shift_steps.size(); ++k) {
    const double v = probe.member_values[k][0];
    vals.push_back(v);
    r.trace.push_back({cfg.probe_t, cfg.shift_steps[k], double(family[k].size()), v});
  }
  if (cfg.diag) {
    const double v = probe.member_values.back()[0];
    r.trace.push_back({cfg.probe_t, 0.0, double(family.back().size()), v});
    r.constants["diag_value"] = v;
  }
  double min_ratio = INFINITY, max_ratio = 0.0;
  for (std::size_t k = 1; k < vals.size(); ++k) {
    const double q = vals[k] / vals[k - 1];
    min_ratio = std::min(min_ratio, q);
    max_ratio = std::max(max_ratio, q);
  }
  r.constants["sup"] = probe.rows.front().sup_value;
  const auto [lo, hi] = std::minmax_element(vals.begin(), vals.end());
  r.constants["spread"] = *hi / *lo;
  if (vals.size() < 2) {
    r.verdict = Verdict::Inapplicable;
    r.notes.emplace_back("family needs at least two members");
    return r;
  }
  r.constants["min_ratio"] = min_ratio;
  r.constants["max_ratio"] = max_ratio;
  // Geometric growth at every refinement is the signature of an unbounded family.
  r.verdict = min_ratio >= cfg.probe_growth ? Verdict::Fail : Verdict::Pass;
  return r;
}

Theorem4Params theorem4_params(const BernsteinFunction& psi, const PsiEntry& entry,
                               std::vector<std::string>& notes) {
  if (entry.theorem4) return *entry.theorem4;
  Theorem4Params p;
  if (const auto* f = std::get_if<FractionalPower>(&psi.kind())) {
    p.alpha = p.gamma = f->alpha;
    p.delta = f->alpha - 1.0;
  } else if (const auto* m = std::get_if<MixedExample2>(&psi.kind())) {
    p.alpha = p.gamma = m->alpha;
    p.delta = m->alpha - 1.0;
    p.R = 100.0;
  } else {
    const double g = estimate_growth_exponent(psi);
    p.alpha = p.gamma = std::clamp(g, 0.05, 0.95);
    notes.push_back("alpha = gamma from the fitted growth exponent " + format_number(g) +
                    (g == p.gamma ? "" : ", clamped into (0,1)"));
  }
  return p;
}

CriterionReport evaluate(const BernsteinFunction& psi, const PsiEntry& entry,
                         const std::string& criterion, const RunConfig& cfg) {
  VerdictSettings vs;
  vs.inversion = cfg.inversion;
  vs.slope_slack = cfg.slope_slack;
  vs.r2_min = cfg.r2_min;
  const auto ts = cfg.t_grid.values();
  if (criterion == "representation") return representation_report(psi, cfg);
  if (criterion == "subordination") return subordination_report(psi, cfg);
  if (criterion == "theorem2") return theorem2_verdict(psi, ts, vs);
  if (criterion == "theorem5") return theorem5_verdict(psi, ts, vs);
  if (criterion == "theorem3") {
    std::vector<std::string> notes;
    const auto t4 = theorem4_params(psi, entry, notes);
    const double delta = t4.delta.value_or(t4.gamma - 1.0);
    double rule = NAN;
    try {
      rule = p_rule(t4.alpha, t4.gamma, delta);
    } catch (const Error& e) {
      notes.emplace_back(std::string("p rule: ") + e.what());
    }
    double p = entry.p ? *entry.p : cfg.p ? *cfg.p : (std::isnan(rule) || rule >= 2.0 ? 2.0 : rule);
    auto r = theorem3_verdict(psi, ts, p, vs);
    r.constants["p_rule"] = rule;
    r.notes.insert(r.notes.begin(), notes.begin(), notes.end());
    return r;
  }
  if (criterion == "theorem4") {
    std::vector<std::string> notes;
    const auto t4 = theorem4_params(psi, entry, notes);
    auto r = theorem4_verdict(psi, t4);
    r.notes.insert(r.notes.begin(), notes.begin(), notes.end());
    return r;
  }
  if (criterion == "multiplication") return multiplication_report(psi, cfg);
  if (criterion == "oracle") return oracle_report(psi, cfg);
  if (criterion == "probe") return probe_report(psi, cfg);
  throw Error(ErrorCode::ConfigParseError, "unknown criterion " + criterion);
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json numbers(const std::map<std::string, double>& m) {
  json j = json::object();
  for (const auto& [k, v] : m) j[k] = number_or_null(v);
  return j;
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out.imbue(std::locale::classic());
  body(out);
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

json config_echo(const RunConfig& c) {
  json j;
  j["t_grid"] = {{"t_min", c.t_grid.t_min}, {"t_max", c.t_grid.t_max},
                 {"per_decade", c.t_grid.per_decade}};
  j["criteria"] = c.criteria;
  j["p"] = c.p ? json(*c.p) : json(nullptr);
  j["slope_slack"] = c.slope_slack;
  j["r2_min"] = c.r2_min;
  j["representation_tol"] = c.representation_tol;
  j["laplace_tol"] = c.laplace_tol;
  j["operator_tol"] = c.operator_tol;
  j["probe_growth"] = c.probe_growth;
  j["density_t"] = c.density_t;
  j["family"] = {{"shift", c.shift_steps},     {"shift_n", c.shift_sizes},
                 {"probe_t", c.probe_t},        {"random", c.random_count},
                 {"random_size", c.random_size}, {"t", c.operator_t}};
  if (c.diag) j["family"]["diag"] = {c.diag->first, c.diag->second};
  j["quad"] = {{"epsilon", c.quadrature.epsilon}, {"tail_cap", c.quadrature.tail_cap},
               {"tol_abs", c.quadrature.tol_abs}, {"tol_rel", c.quadrature.tol_rel}};
  j["nu"] = {{"grid_size", c.inversion.grid_size}, {"r_max", c.inversion.r_max},
             {"decay_floor", c.inversion.decay_floor}};
  j["seed"] = c.seed;
  j["output"] = c.output_dir.generic_string();
  json psis = json::array();
  for (const auto& e : c.psis) {
    json pj = {{"name", e.name}, {"spec", e.spec}};
    if (!e.criteria.empty()) pj["criteria"] = e.criteria;
    if (e.p) pj["p"] = *e.p;
    if (e.theorem4) {
      pj["theorem4"] = {{"alpha", e.theorem4->alpha},
                        {"gamma", e.theorem4->gamma},
                        {"delta", e.theorem4->delta ? json(*e.theorem4->delta) : json(nullptr)},
                        {"R", e.theorem4->R}};
    }
    psis.push_back(pj);
  }
  j["psi"] = psis;
  return j;
}

}  // namespace

std::vector<double> TGridSpec::values() const {
  const int n = static_cast<int>(std::lround(per_decade * std::log10(t_max / t_min))) + 1;
  return geometric(t_min, t_max, std::max(n, 2));
}

const std::vector<std::string>& known_criteria() {
  static const std::vector<std::string> names = {
      "representation", "subordination", "theorem2", "theorem3", "theorem4",
      "theorem5",       "multiplication", "oracle",   "probe"};
  return names;
}

std::string sanitize_name(std::string_view spec) {
  std::string out;
  for (char c : spec) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '_';
    out.push_back(ok ? c : '_');
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out.empty() ? "psi" : out;
}

void validate_config(const RunConfig& config) {
  if (config.psis.empty()) config_error("no [psi:<name>] sections");
  const auto& g = config.t_grid;
  if (!(g.t_min > 0.0) || !(g.t_max > g.t_min) || g.per_decade < 1) {
    config_error("t grid must satisfy 0 < t_min < t_max and t_per_decade >= 1");
  }
  for (double t : config.density_t) {
    if (!(t > 0.0)) config_error("run.density_t entries must be positive");
  }
  for (double h : config.shift_steps) {
    if (!(h > 0.0)) config_error("family.shift entries must be positive");
  }
  if (config.random_count < 0 || config.random_size < 1) config_error("bad random family size");
  if (!config.shift_sizes.empty() && config.shift_sizes.size() != config.shift_steps.size()) {
    config_error("family.shift_n needs one size per family.shift step");
  }
  try {
    config.quadrature.validate();
  } catch (const Error& e) {
    config_error(std::string("quad: ") + e.what());
  }
  const auto& inv = config.inversion;
  const bool pow2 = inv.grid_size >= 65536 && (inv.grid_size & (inv.grid_size - 1)) == 0;
  if (!pow2 || !(inv.r_max > 0.0) || !(inv.decay_floor > 0.0 && inv.decay_floor < 1.0)) {
    config_error("nu: grid_size must be a power of two >= 65536, r_max > 0, decay_floor in (0,1)");
  }
  if (config.p && !(*config.p > 1.0 && *config.p <= 2.0)) config_error("crit.p must lie in (1,2]");
  for (const auto& c : config.criteria) {
    if (std::find(known_criteria().begin(), known_criteria().end(), c) == known_criteria().end()) {
      config_error("unknown criterion '" + c + "'");
    }
  }
  if (config.criteria.empty()) config_error("empty criteria list");
  for (const auto& e : config.psis) {
    try {
      parse_catalog(e.spec);
    } catch (const Error& err) {
      config_error("psi '" + e.name + "': " + err.what());
    }
  }
}

RunConfig parse_config(std::istream& in, const fs::path& base_dir) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    config_error(e.what());
  }
  RunConfig cfg;
  std::optional<fs::path> output;
  std::set<std::string> names;
  for (const auto& [section, body] : tree) {
    if (body.empty()) config_error("key outside a section: " + section);
    auto each = [&](auto&& handle) {
      for (const auto& [key, node] : body) {
        const std::string full = section + "." + key;
        if (!handle(key, node.data(), full)) config_error("unknown key " + full);
      }
    };
    if (section == "run") {
      each([&](const std::string& k, const std::string& v, const std::string& full) {
        if (k == "output") output = fs::path(trim(v));
        else if (k == "seed") {
          const long long s = parse_int(full, v);
          if (s < 0) config_error(full + ": seed must be non-negative");
          cfg.seed = static_cast<std::uint64_t>(s);
        } else if (k == "criteria") cfg.criteria = parse_criteria(full, v);
        else if (k == "density_t") cfg.density_t = parse_doubles(full, v);
        else return false;
        return true;
      });
    } else if (section == "crit") {
      each([&](const std::string& k, const std::string& v, const std::string& full) {
        if (k == "t_min") cfg.t_grid.t_min = parse_double(full, v);
        else if (k == "t_max") cfg.t_grid.t_max = parse_double(full, v);
        else if (k == "t_per_decade") cfg.t_grid.per_decade = static_cast<int>(parse_int(full, v));
        else if (k == "p") cfg.p = parse_double(full, v);
        else if (k == "slope_slack") cfg.slope_slack = parse_double(full, v);
        else if (k == "r2_min") cfg.r2_min = parse_double(full, v);
        else if (k == "representation_tol") cfg.representation_tol = parse_double(full, v);
        else if (k == "laplace_tol") cfg.laplace_tol = parse_double(full, v);
        else if (k == "operator_tol") cfg.operator_tol = parse_double(full, v);
        else if (k == "probe_growth") cfg.probe_growth = parse_double(full, v);
        else return false;
        return true;
      });
    } else if (section == "family") {
      each([&](const std::string& k, const std::string& v, const std::string& full) {
        if (k == "shift") cfg.shift_steps = parse_doubles(full, v);
        else if (k == "probe_t") cfg.probe_t = parse_double(full, v);
        else if (k == "random") cfg.random_count = static_cast<int>(parse_int(full, v));
        else if (k == "random_size") cfg.random_size = static_cast<int>(parse_int(full, v));
        else if (k == "t") cfg.operator_t = parse_doubles(full, v);
        else if (k == "shift_n") {
          cfg.shift_sizes.clear();
          for (double n : parse_doubles(full, v)) {
            if (n != std::floor(n) || n < 2 || n > 4096) config_error(full + ": sizes must be integers in [2, 4096]");
            cfg.shift_sizes.push_back(static_cast<int>(n));
          }
        } else if (k == "diag") {
          const auto d = parse_doubles(full, v);
          if (d.size() != 2 || !(d[0] < -1.0) || d[1] != std::floor(d[1]) || d[1] < 2 || d[1] > 4096) {
            config_error(full + ": expected '<lambda_min < -1>, <count>'");
          }
          cfg.diag = std::pair{d[0], static_cast<int>(d[1])};
        } else return false;
        return true;
      });
    } else if (section == "quad") {
      each([&](const std::string& k, const std::string& v, const std::string& full) {
        if (k == "epsilon") cfg.quadrature.epsilon = parse_double(full, v);
        else if (k == "tail_cap") cfg.quadrature.tail_cap = parse_double(full, v);
        else if (k == "tol_abs") cfg.quadrature.tol_abs = parse_double(full, v);
        else if (k == "tol_rel") cfg.quadrature.tol_rel = parse_double(full, v);
        else return false;
        return true;
      });
    } else if (section == "nu") {
      each([&](const std::string& k, const std::string& v, const std::string& full) {
        if (k == "grid_size") {
          const long long n = parse_int(full, v);
          if (n < 1) config_error(full + ": must be positive");
          cfg.inversion.grid_size = static_cast<std::size_t>(n);
          cfg.inversion.max_grid_size = std::max(cfg.inversion.max_grid_size, cfg.inversion.grid_size);
        } else if (k == "r_max") cfg.inversion.r_max = parse_double(full, v);
        else if (k == "decay_floor") cfg.inversion.decay_floor = parse_double(full, v);
        else return false;
        return true;
      });
    } else if (section.rfind("psi:", 0) == 0) {
      PsiEntry e;
      e.name = trim(section.substr(4));
      if (e.name.empty() || sanitize_name(e.name) != e.name) {
        config_error("bad psi section name '" + section + "'");
      }
      if (!names.insert(e.name).second) config_error("duplicate section " + section);
      std::optional<double> alpha, gamma, delta, R;
      each([&](const std::string& k, const std::string& v, const std::string& full) {
        if (k == "spec") e.spec = trim(v);
        else if (k == "criteria") e.criteria = parse_criteria(full, v);
        else if (k == "p") e.p = parse_double(full, v);
        else if (k == "alpha") alpha = parse_double(full, v);
        else if (k == "gamma") gamma = parse_double(full, v);
        else if (k == "delta") delta = parse_double(full, v);
        else if (k == "R") R = parse_double(full, v);
        else return false;
        return true;
      });
      if (e.spec.empty()) config_error(section + ": missing spec");
      try {
        parse_catalog(e.spec);
      } catch (const Error& err) {
        config_error(section + ".spec: " + err.what());
      }
      if (alpha || gamma || delta || R) {
        if (!alpha || !gamma) config_error(section + ": alpha and gamma go together");
        e.theorem4 = Theorem4Params{*alpha, *gamma, delta, R.value_or(1.0)};
      }
      cfg.psis.push_back(std::move(e));
    } else {
      config_error("unknown section [" + section + "]");
    }
  }
  validate_config(cfg);
  cfg.output_dir = output ? (output->is_absolute() ? *output : base_dir / *output)
                          : base_dir / cfg.output_dir;
  return cfg;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  return parse_config(in, path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

unsigned worker_count() {
  if (const char* env = std::getenv("SUBORD_WORKERS"); env && *env) {
    const long long n = parse_int("SUBORD_WORKERS", env);
    if (n < 1) config_error("SUBORD_WORKERS must be positive");
    return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void write_trace_csv(std::ostream& out, const CriterionReport& report) {
  for (std::size_t k = 0; k < report.trace_columns.size(); ++k) {
    out << (k ? "," : "") << report.trace_columns[k];
  }
  out << '\n';
  for (const auto& row : report.trace) {
    for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << format_number(row[k]);
    out << '\n';
  }
}

RunReport run(const RunConfig& cfg) {
  validate_config(cfg);
  const unsigned workers = worker_count();
  const fs::path& root = cfg.output_dir;
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + root.string() + ": " + ec.message());
  fs::remove(root / "incomplete", ec);

  struct Task {
    std::size_t psi = 0;
    std::string criterion;  // empty: density dump
    double t = 0.0;
    CriterionReport report;
    json density;
    std::optional<std::string> failure;
    double seconds = 0.0;
  };
  std::vector<BernsteinFunction> psis;
  std::vector<Task> tasks;
  for (std::size_t i = 0; i < cfg.psis.size(); ++i) {
    psis.push_back(parse_catalog(cfg.psis[i].spec));
    const auto& list = cfg.psis[i].criteria.empty() ? cfg.criteria : cfg.psis[i].criteria;
    for (const auto& c : list) {
      tasks.emplace_back();
      tasks.back().psi = i;
      tasks.back().criterion = c;
    }
    for (double t : cfg.density_t) {
      tasks.emplace_back();
      tasks.back().psi = i;
      tasks.back().t = t;
    }
  }

  auto execute = [&](Task& task) {
    const auto& entry = cfg.psis[task.psi];
    const auto& psi = psis[task.psi];
    const auto start = std::chrono::steady_clock::now();
    try {
      if (task.criterion.empty()) {
        const fs::path rel = fs::path("densities") / entry.name / ("nu_t_" + t_label(task.t) + ".csv");
        task.density = {{"t", task.t}, {"file", rel.generic_string()}};
        try {
          const auto nu = subordination_measure(psi, task.t, cfg.inversion);
          task.density["representation"] = nu.label();
          task.density["mass"] = number_or_null(nu.mass());
          const auto grid = geometric(1e-3, 1e2, 251);
          write_file(root / rel, [&](std::ostream& out) { write_density_csv(out, nu, grid); });
        } catch (const Error& e) {
          if (!is_result_error(e.code()) && e.code() != ErrorCode::DomainError) throw;
          task.density["file"] = nullptr;
          task.density["note"] = e.what();
        }
      } else {
        try {
          task.report = evaluate(psi, entry, task.criterion, cfg);
        } catch (const Error& e) {
          if (!is_result_error(e.code())) throw;
          task.report = CriterionReport{};
          task.report.verdict = Verdict::Inapplicable;
          task.report.notes.emplace_back(e.what());
        }
        task.report.id = task.criterion;
        task.report.psi = psi.spec();
        if (!task.report.trace_columns.empty()) {
          const fs::path path = root / "traces" / entry.name / (task.criterion + ".csv");
          write_file(path, [&](std::ostream& out) { write_trace_csv(out, task.report); });
        }
      }
    } catch (const std::exception& e) {
      task.failure = e.what();
    }
    task.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < tasks.size();) execute(tasks[k]);
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < std::min<std::size_t>(workers, tasks.size()); ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  RunReport out;
  json psi_list = json::array();
  std::vector<std::string> failures;
  for (std::size_t i = 0; i < cfg.psis.size(); ++i) {
    json pj = {{"name", cfg.psis[i].name}, {"spec", psis[i].spec()}};
    json crits = json::array(), dens = json::array(), stages = json::object();
    for (auto& task : tasks) {
      if (task.psi != i) continue;
      const std::string stage = task.criterion.empty() ? "nu_t_" + t_label(task.t) : task.criterion;
      stages[stage] = task.seconds;
      if (task.failure) {
        failures.push_back(cfg.psis[i].name + "/" + stage + ": " + *task.failure);
      }
      if (task.criterion.empty()) {
        if (task.failure) task.density["error"] = *task.failure;
        dens.push_back(task.density);
        continue;
      }
      const auto& r = task.report;
      json cj = {{"id", task.criterion}};
      if (task.failure) {
        cj["verdict"] = nullptr;
        cj["error"] = *task.failure;
      } else {
        cj["verdict"] = std::string(to_string(r.verdict));
        cj["route"] = r.route;
        if (r.fit) {
          cj["fit"] = {{"slope", number_or_null(r.fit->slope)},
                       {"r2", number_or_null(r.fit->r2)},
                       {"poor_fit", r.fit->poor_fit}};
        }
        cj["constants"] = numbers(r.constants);
        cj["settings"] = numbers(r.settings);
        cj["notes"] = r.notes;
        cj["trace"] = r.trace_columns.empty()
                          ? json(nullptr)
                          : json(("traces/" + cfg.psis[i].name + "/" + task.criterion + ".csv"));
        out.reports.push_back(r);
      }
      crits.push_back(cj);
    }
    pj["criteria"] = crits;
    pj["densities"] = dens;
    pj["stage_seconds"] = stages;
    psi_list.push_back(pj);
  }
  out.complete = failures.empty();
  out.json = {{"tool", "subord"},
              {"version", kVersion},
              {"config", config_echo(cfg)},
              {"workers", workers},
              {"psi", psi_list},
              {"incomplete", !out.complete},
              {"failures", failures}};
  write_file(root / "report.json", [&](std::ostream& o) { o << out.json.dump(2) << '\n'; });
  if (!out.complete) {
    write_file(root / "incomplete", [&](std::ostream& o) {
      for (const auto& f : failures) o << f << '\n';
    });
  }
  return out;
}

RunReport run(const fs::path& config_path) { return run(load_config(config_path)); }

std::string list_catalog() {
  return "frac(alpha,c): rho=alpha u^{-alpha} e^{-c u}/Gamma(1-alpha), "
         "nu_t=Levy-Smirnov tilted by c for alpha=1/2, Fourier inversion otherwise; "
         "alpha in (0,1), c >= 0; psi=c^alpha-(c-z)^alpha\n"
         "log(b): rho=exp(-b u), nu_t=Gamma(t,b); b > 0; psi=log b-log(b-z)\n"
         "acosh(1): rho=exp(-u) I0(u), nu_t=t r^{-1} e^{-r} I_t(r); psi=-acosh(1-z)\n"
         "acosh(b): rho=exp(-b u) I0(u), nu_t=t r^{-1} e^{-r} I_t(r) tilted by exp(-(b-1) r); "
         "b >= 1; psi=acosh b-acosh(b-z)\n"
         "mixed(alpha,beta): rho=numerical, nu_t=Fourier inversion; 0 < alpha < beta < 1; "
         "psi=-(-z)^alpha+exp(-(-z)^beta)-1\n"
         "custom(a0=<v>; w:a:b; ...): rho=a0 delta_0 + sum w u^{-a} e^{-b u}, "
         "nu_t=point mass at a0 t without terms, Fourier inversion otherwise; "
         "a0 >= 0, w > 0, a < 1, b >= 0 (b > 0 unless a > 0); psi=a0 z+representation integral\n"
         "<theta>*<entry>: rho -> theta rho, nu_t -> nu_{theta t}\n";
}

}  // namespace subord
