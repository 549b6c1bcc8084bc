#include "subord/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "subord/error.hpp"
#include "subord/levy_quadrature.hpp"
#include "subord/subordination.hpp"

namespace subord {

namespace {

constexpr double kPi = std::numbers::pi;
// A fitted exponent this close to -1 is read as a logarithmic divergence.
constexpr double kBorderSlack = 0.02;

bool is_unavailable(ErrorCode c) {
  return c == ErrorCode::NoDecay || c == ErrorCode::NonDecayingSymbol ||
         c == ErrorCode::GridTooCoarse || c == ErrorCode::ToleranceNotMet ||
         c == ErrorCode::NoClosedForm || c == ErrorCode::Inapplicable ||
         c == ErrorCode::NonIntegrableTail;
}

std::vector<double> geometric(double lo, double hi, std::size_t n) {
  std::vector<double> g(n);
  for (std::size_t k = 0; k < n; ++k) {
    g[k] = lo * std::pow(hi / lo, static_cast<double>(k) / static_cast<double>(n - 1));
  }
  return g;
}

// Least-squares slope of log v against log y.
double log_slope(const std::vector<double>& y, const std::vector<double>& v) {
  double mx = 0, my = 0;
  const double n = static_cast<double>(y.size());
  for (std::size_t k = 0; k < y.size(); ++k) mx += std::log(y[k]) / n, my += std::log(v[k]) / n;
  double sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    sxx += (std::log(y[k]) - mx) * (std::log(y[k]) - mx);
    sxy += (std::log(y[k]) - mx) * (std::log(v[k]) - my);
  }
  return sxy / sxx;
}

// Integral of |v|^p beyond one side's grid: head [0, |y|_min] and tail
// [|y|_max, inf), from power laws fitted over the extreme decades.
double side_extension(const std::vector<double>& y, const std::vector<double>& vp, TailFit fit) {
  if (y.size() < 3) return 0.0;
  double extra = 0.0;
  auto fit_range = [&](bool head) {
    std::vector<double> ys, vs;
    const double lo = head ? y.front() : y.back() / 10.0;
    const double hi = head ? 10.0 * y.front() : y.back();
    for (std::size_t k = 0; k < y.size(); ++k) {
      if (y[k] >= lo && y[k] <= hi && vp[k] > 0.0) {
        ys.push_back(y[k]);
        vs.push_back(vp[k]);
      }
    }
    return std::pair{ys, vs};
  };
  {
    auto [ys, vs] = fit_range(true);
    if (ys.size() >= 3) {
      const double e = log_slope(ys, vs);
      if (e <= -1.0 + kBorderSlack) {
        throw Error(ErrorCode::Divergent, "head |v|^p ~ y^" + std::to_string(e) + " near 0");
      }
      extra += vp.front() * y.front() / (e + 1.0);
    }
  }
  if (fit == TailFit::HeadAndTail) {
    auto [ys, vs] = fit_range(false);
    if (ys.size() >= 3 && vp.back() > 0.0) {
      const double e = log_slope(ys, vs);
      if (e >= -1.0 - kBorderSlack) {
        throw Error(ErrorCode::Divergent, "tail |v|^p ~ y^" + std::to_string(e));
      }
      extra += vp.back() * y.back() / (-e - 1.0);
    }
  }
  return extra;
}

cplx symbol_at(const BernsteinFunction& psi, double t, double y) {
  const cplx p = psi(cplx(0.0, y));
  return p * std::exp(t * p);
}

}  // namespace

SymbolProfile compute_symbol(const BernsteinFunction& psi, double t, double y_max,
                             std::size_t n_points, double decay_floor) {
  if (!(t > 0.0)) throw Error(ErrorCode::ParameterOutOfRange, "t must be > 0");
  if (n_points < 16) throw Error(ErrorCode::ParameterOutOfRange, "need at least 16 points");
  auto magnitude = [&](double y) { return std::abs(symbol_at(psi, t, y)); };
  const SymbolScale sc = symbol_scale(magnitude, decay_floor);
  SymbolProfile out;
  out.t = t;
  if (y_max <= 0.0) {
    out.no_decay = !(sc.lambda_floor > 0.0);
    y_max = out.no_decay ? std::ldexp(1.0, 50) : sc.lambda_floor;
  } else {
    out.no_decay = magnitude(y_max) > decay_floor * sc.peak;
  }
  double scale = sc.lambda_half;
  if (sc.lambda_rise > 0.0) scale = scale > 0.0 ? std::min(scale, sc.lambda_rise) : sc.lambda_rise;
  const double y_lo = 1e-8 * (scale > 0.0 ? std::min(scale, y_max) : 1.0);
  const auto pos = geometric(y_lo, y_max, n_points);
  const double h = std::log(y_max / y_lo) / static_cast<double>(n_points - 1);

  const std::size_t n = 2 * n_points + 1;
  out.y.resize(n);
  out.weights.assign(n, 0.0);
  out.F.resize(n);
  out.dF.resize(n);
  auto fill = [&](std::size_t idx, double y, double w) {
    out.y[idx] = y;
    out.weights[idx] = w;
    const cplx z(0.0, y);
    const cplx p = psi(z);
    const cplx e = std::exp(t * p);
    out.F[idx] = p * e;
    try {
      out.dF[idx] = cplx(0.0, 1.0) * psi.derivative(z) * e * (t * p + 1.0);
    } catch (const Error&) {
      out.dF[idx] = cplx(std::numeric_limits<double>::quiet_NaN());
    }
  };
  for (std::size_t k = 0; k < n_points; ++k) {
    const double w = pos[k] * h * ((k == 0 || k + 1 == n_points) ? 0.5 : 1.0);
    fill(n_points + 1 + k, pos[k], w);
    fill(n_points - 1 - k, -pos[k], w);
  }
  fill(n_points, 0.0, 0.0);
  return out;
}

double lp_norm(std::span<const double> values, std::span<const double> grid, double p,
               std::span<const double> weights, TailFit fit) {
  if (values.size() != grid.size() || (!weights.empty() && weights.size() != grid.size())) {
    throw Error(ErrorCode::ParameterOutOfRange, "values, grid and weights differ in length");
  }
  if (!(p >= 1.0)) throw Error(ErrorCode::ParameterOutOfRange, "p must be >= 1");
  const std::size_t n = grid.size();
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double w = 0.0;
    if (!weights.empty()) {
      w = weights[k];
    } else {
      if (k > 0) w += 0.5 * (grid[k] - grid[k - 1]);
      if (k + 1 < n) w += 0.5 * (grid[k + 1] - grid[k]);
    }
    if (w != 0.0) sum += w * std::pow(std::abs(values[k]), p);
  }
  if (fit != TailFit::None) {
    std::vector<double> ypos, vpos, yneg, vneg;
    for (std::size_t k = 0; k < n; ++k) {
      if (grid[k] > 0.0) {
        ypos.push_back(grid[k]);
        vpos.push_back(std::pow(std::abs(values[k]), p));
      } else if (grid[k] < 0.0) {
        yneg.push_back(-grid[k]);
        vneg.push_back(std::pow(std::abs(values[k]), p));
      }
    }
    std::reverse(yneg.begin(), yneg.end());
    std::reverse(vneg.begin(), vneg.end());
    sum += side_extension(ypos, vpos, fit) + side_extension(yneg, vneg, fit);
  }
  return std::pow(sum, 1.0 / p);
}

Theorem3Value theorem3_quantity(const BernsteinFunction& psi, double t, double p) {
  if (!(p > 1.0 && p <= 2.0)) throw Error(ErrorCode::ParameterOutOfRange, "p must lie in (1, 2]");
  const SymbolProfile prof = compute_symbol(psi, t);
  std::vector<double> y, w, f, df;
  for (std::size_t k = 0; k < prof.y.size(); ++k) {
    if (prof.y[k] == 0.0) continue;
    y.push_back(prof.y[k]);
    w.push_back(prof.weights[k]);
    f.push_back(std::abs(prof.F[k]));
    df.push_back(std::abs(prof.dF[k]));
  }
  Theorem3Value out;
  out.p = p;
  out.q = p / (p - 1.0);
  try {
    out.norm_F = lp_norm(f, y, p, w, TailFit::HeadAndTail);
    out.norm_dF = lp_norm(df, y, p, w, TailFit::HeadAndTail);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Divergent) throw;
    throw Error(ErrorCode::Inapplicable, std::string("L^p norm diverges: ") + e.what());
  }
  out.value = std::pow(out.norm_F, 1.0 / out.q) * std::pow(out.norm_dF, 1.0 / p);
  return out;
}

InvertedSignal fourier_density(const BernsteinFunction& psi, double t,
                               const InversionParams& params) {
  if (!(t > 0.0)) throw Error(ErrorCode::ParameterOutOfRange, "t must be > 0");
  auto symbol = [&psi, t](cplx lambda) {
    const cplx p = psi(cplx(0.0, 1.0) * lambda);
    return p * std::exp(t * p);
  };
  InvertedSignal sig = invert_fourier(symbol, params);
  if (sig.imag_residue > 1e-6) {
    throw Error(ErrorCode::ToleranceNotMet,
                "imaginary residue " + std::to_string(sig.imag_residue) + " of the peak");
  }
  return sig;
}

InversionParams k_inversion_params() {
  InversionParams p;
  p.r_max = 1024.0;
  return p;
}

KEstimate k_fourier_estimate(const BernsteinFunction& psi, double t,
                             const InversionParams& params, double q) {
  InvertedSignal b;
  try {
    b = fourier_density(psi, t, params);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NonDecayingSymbol) throw;
    throw Error(ErrorCode::NoDecay, e.what());
  }
  KEstimate out;
  out.lambda_max = b.lambda_max;
  out.grid = b.size();
  double neg = 0.0;
  double pos = 0.0;
  double lq = 0.0;
  const double to_unitary = std::sqrt(2.0 * kPi);
  for (std::size_t j = 0; j < b.size(); ++j) {
    const double a = std::abs(b.values[j]);
    (b.r(j) < 0.0 ? neg : pos) += a * b.dr;
    lq += std::pow(to_unitary * a, q) * b.dr;
  }
  // For large r, b_t approaches the Levy density rho(r)/r; its exact tail,
  // matched to b_t at the window edge, continues the integral.
  double tail = 0.0;
  const double r_end = b.r(b.size() - 1);
  const LevyMeasure& rho = psi.levy();
  if (rho.has_density() && rho.inverse_moment_tail) {
    const double levy_end = rho.density(r_end) / r_end;
    if (levy_end > 0.0 && b.values.back() > 0.0) {
      tail = b.values.back() / levy_end * rho.inverse_moment_tail(r_end);
    }
  }
  out.K = neg + pos + tail;
  out.negative_fraction = out.K > 0.0 ? neg / out.K : 0.0;
  out.tail_fraction = out.K > 0.0 ? tail / out.K : 0.0;
  out.norm_q = std::pow(lq, 1.0 / q);
  return out;
}

double k_lower_bound(const BernsteinFunction& psi, double t) {
  static const double s[5] = {-0.1, -0.5, -1.0, -2.0, -5.0};
  struct Poly {
    std::vector<int> idx;
    std::vector<double> c;
  };
  std::vector<Poly> family;
  for (int i = 0; i < 5; ++i) family.push_back({{i}, {1.0}});
  for (int i = 0; i < 5; ++i) {
    for (int j = i + 1; j < 5; ++j) {
      family.push_back({{i, j}, {1.0, -1.0}});
      family.push_back({{i, j}, {1.0, 1.0}});
      family.push_back({{i, j}, {1.0, -2.0}});
    }
  }
  for (int i = 0; i < 5; ++i) {
    for (int j = i + 1; j < 5; ++j) {
      for (int k = j + 1; k < 5; ++k) family.push_back({{i, j, k}, {1.0, -1.0, 1.0}});
    }
  }
  for (int skip = 0; skip < 5; ++skip) {
    Poly p;
    for (int i = 0; i < 5; ++i) {
      if (i == skip) continue;
      p.idx.push_back(i);
      p.c.push_back(p.c.size() % 2 == 0 ? 1.0 : -1.0);
    }
    family.push_back(p);
  }
  std::vector<double> r_grid = geometric(1e-4, 400.0, 4000);
  r_grid.insert(r_grid.begin(), 0.0);
  cplx F[5];
  for (int i = 0; i < 5; ++i) {
    const cplx p = psi(s[i]);
    F[i] = p * std::exp(t * p);
  }
  double best = 0.0;
  for (const auto& poly : family) {
    double sup = 0.0;
    for (double r : r_grid) {
      double v = 0.0;
      for (std::size_t j = 0; j < poly.idx.size(); ++j) v += poly.c[j] * std::exp(s[poly.idx[j]] * r);
      sup = std::max(sup, std::abs(v));
    }
    cplx pairing = 0.0;
    for (std::size_t j = 0; j < poly.idx.size(); ++j) pairing += poly.c[j] * F[poly.idx[j]];
    if (sup > 0.0) best = std::max(best, std::abs(pairing) / sup);
  }
  return best;
}

std::vector<cplx> SectorSamples::points() const {
  std::vector<double> rays = ray_args;
  if (rays.empty()) rays = {0.0, kPi / 4, -kPi / 4, kPi / 2 - edge, -(kPi / 2 - edge)};
  const double decades = std::log10(r_max / r_min);
  const auto n = static_cast<std::size_t>(std::lround(decades * per_decade)) + 1;
  std::vector<cplx> pts;
  for (double phi : rays) {
    for (double r : geometric(r_min, r_max, n)) pts.push_back(-std::polar(r, phi));
  }
  return pts;
}

SectorResult sector_check(const BernsteinFunction& psi, const SectorSamples& samples) {
  std::vector<cplx> w;
  for (const cplx z : samples.points()) {
    w.push_back(psi(z));
    if (!(w.back().real() < 0.0)) {
      throw Error(ErrorCode::NotSectorial, "psi leaves the open left half-plane");
    }
  }
  const double step = kPi / (2.0 * (samples.theta_points + 1));
  const double cap = kPi / 2.0 - 1e-3;
  const auto n_beta = static_cast<int>(std::lround(samples.beta_max / samples.beta_step));
  for (int b = 0; b <= n_beta; ++b) {
    const double beta = b * samples.beta_step;
    double needed = 0.0;
    for (const cplx v : w) needed = std::max(needed, std::abs(std::arg(cplx(beta) - v)));
    // Smallest grid angle strictly above the one needed.
    const double j = std::floor(needed / step) + 1.0;
    if (j <= samples.theta_points && j * step <= cap) return {j * step, beta, needed};
  }
  throw Error(ErrorCode::NotSectorial, "no sampled sector with theta < pi/2 - 1e-3");
}

bool sector_contains(const BernsteinFunction& psi, double theta, double beta,
                     const SectorSamples& samples) {
  const TruncatedSector sector(theta, beta);
  for (const cplx z : samples.points()) {
    if (!sector.contains(psi(z))) return false;
  }
  return true;
}

namespace {

struct DecadeSamples {
  std::vector<double> modulus;
  std::vector<int> decade;
};

std::vector<double> growth_rays(const GrowthSamples& s) {
  if (!s.ray_args.empty()) return s.ray_args;
  return {0.0, kPi / 4, -kPi / 4, kPi / 2 - s.edge, -(kPi / 2 - s.edge)};
}

DecadeSamples decade_grid(double R, const GrowthSamples& s) {
  DecadeSamples out;
  const auto n = static_cast<std::size_t>(std::lround(s.decades * s.per_decade)) + 1;
  const int last = static_cast<int>(std::ceil(s.decades)) - 1;
  for (double r : geometric(R, R * std::pow(10.0, s.decades), n)) {
    out.modulus.push_back(r);
    out.decade.push_back(std::min(last, static_cast<int>(std::floor(std::log10(r / R) + 1e-12))));
  }
  return out;
}

// Steady drift of the last three decade extremes by more than `factor`.
bool drifts_down(const std::vector<double>& d) {
  if (d.size() < 3) return false;
  const std::size_t n = d.size();
  return d[n - 1] < d[n - 2] && d[n - 2] < d[n - 3] && d[n - 1] < 0.9 * d[n - 3];
}
bool drifts_up(const std::vector<double>& d) {
  if (d.size() < 3) return false;
  const std::size_t n = d.size();
  return d[n - 1] > d[n - 2] && d[n - 2] > d[n - 3] && d[n - 1] > 1.1 * d[n - 3];
}

}  // namespace

GrowthResult growth_check(const BernsteinFunction& psi, double alpha, double gamma, double R,
                          const GrowthSamples& samples) {
  if (!(alpha > 0.0 && alpha <= gamma && gamma < 1.0) || !(R >= 1.0)) {
    throw Error(ErrorCode::ParameterOutOfRange, "need 0 < alpha <= gamma < 1 and R >= 1");
  }
  const auto grid = decade_grid(R, samples);
  const int decades = grid.decade.back() + 1;
  GrowthResult out;
  out.b = std::numeric_limits<double>::infinity();
  out.decade_min.assign(decades, std::numeric_limits<double>::infinity());
  out.decade_max.assign(decades, 0.0);
  for (double phi : growth_rays(samples)) {
    for (std::size_t k = 0; k < grid.modulus.size(); ++k) {
      const double r = grid.modulus[k];
      const double m = std::abs(psi(-std::polar(r, phi)));
      const double lo = m / std::pow(r, alpha);
      const double hi = m / std::pow(r, gamma);
      out.b = std::min(out.b, lo);
      out.k = std::max(out.k, hi);
      out.decade_min[grid.decade[k]] = std::min(out.decade_min[grid.decade[k]], lo);
      out.decade_max[grid.decade[k]] = std::max(out.decade_max[grid.decade[k]], hi);
    }
  }
  if (out.b <= 1e-12 || drifts_down(out.decade_min)) {
    throw Error(ErrorCode::LowerBoundFails,
                "|psi(z)|/|z|^alpha decays over the sampled decades (min " + std::to_string(out.b) +
                    ")");
  }
  if (drifts_up(out.decade_max)) {
    throw Error(ErrorCode::UpperBoundFails, "|psi(z)|/|z|^gamma grows over the sampled decades");
  }
  return out;
}

double p_rule(double alpha, double gamma, double delta) {
  if (alpha < gamma) {
    return std::min({2.0, 1.0 / (alpha - gamma - delta), (alpha - delta - 1.0) / (gamma - alpha)});
  }
  return 0.5 * (1.0 + std::min(2.0, 1.0 / (1.0 - gamma)));
}

DerivativeGrowth derivative_growth_check(const BernsteinFunction& psi, double alpha, double gamma,
                                         double delta, double R, const GrowthSamples& samples) {
  if (!(alpha > 0.0 && alpha <= gamma && gamma < 1.0) || !(R >= 1.0)) {
    throw Error(ErrorCode::ParameterOutOfRange, "need 0 < alpha <= gamma < 1 and R >= 1");
  }
  DerivativeGrowth out;
  if (alpha < gamma) {
    out.window_lo = alpha - gamma - 1.0;
    out.window_hi = 2.0 * alpha - gamma - 1.0;
    if (!(delta > out.window_lo && delta < out.window_hi)) {
      throw Error(ErrorCode::WindowViolated, "delta outside (" + std::to_string(out.window_lo) +
                                                 ", " + std::to_string(out.window_hi) + ")");
    }
  } else {
    out.window_lo = out.window_hi = gamma - 1.0;
    if (std::abs(delta - (gamma - 1.0)) > 1e-12) {
      throw Error(ErrorCode::WindowViolated, "alpha = gamma requires delta = gamma - 1");
    }
  }
  out.p = p_rule(alpha, gamma, delta);
  out.q = out.p / (out.p - 1.0);

  const auto grid = decade_grid(R, samples);
  const int decades = grid.decade.back() + 1;
  std::vector<double> dmax(decades, 0.0);
  for (double sign : {1.0, -1.0}) {
    for (std::size_t k = 0; k < grid.modulus.size(); ++k) {
      const double y = sign * grid.modulus[k];
      const double ratio = std::abs(psi.derivative(cplx(0.0, y))) / std::pow(std::abs(y), delta);
      out.k = std::max(out.k, ratio);
      dmax[grid.decade[k]] = std::max(dmax[grid.decade[k]], ratio);
    }
  }
  if (!std::isfinite(out.k) || drifts_up(dmax)) {
    throw Error(ErrorCode::BoundFails, "|psi'(iy)|/|y|^delta grows over the sampled decades");
  }
  // psi'(i.) in L^p([0, R]).
  const auto ys = geometric(1e-10 * R, R, 2000);
  std::vector<double> vals;
  for (double y : ys) vals.push_back(std::abs(psi.derivative(cplx(0.0, y))));
  const double h = std::log(ys.back() / ys.front()) / static_cast<double>(ys.size() - 1);
  std::vector<double> w(ys.size());
  for (std::size_t k = 0; k < ys.size(); ++k) {
    w[k] = ys[k] * h * ((k == 0 || k + 1 == ys.size()) ? 0.5 : 1.0);
  }
  try {
    out.lp_head = lp_norm(vals, ys, out.p, w, TailFit::Head);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Divergent) throw;
    throw Error(ErrorCode::BoundFails, std::string("psi'(iy) not in L^p near 0: ") + e.what());
  }
  return out;
}

ScalingFit fit_scaling_exponent(std::span<const double> ts, std::span<const double> qs,
                                double r2_min) {
  if (ts.size() != qs.size() || ts.size() < 6) {
    throw Error(ErrorCode::ParameterOutOfRange, "slope fit needs at least 6 (t, Q) pairs");
  }
  const double n = static_cast<double>(ts.size());
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    if (!(ts[k] > 0.0 && qs[k] > 0.0)) {
      throw Error(ErrorCode::ParameterOutOfRange, "slope fit needs positive t and Q");
    }
    mx += std::log(ts[k]) / n;
    my += std::log(qs[k]) / n;
  }
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const double dx = std::log(ts[k]) - mx;
    const double dy = std::log(qs[k]) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  ScalingFit f;
  f.slope = sxy / sxx;
  f.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  f.poor_fit = f.r2 < r2_min;
  return f;
}

std::string_view to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Inapplicable: return "inapplicable";
  }
  return "?";
}

namespace {

CriterionReport base_report(std::string id, const BernsteinFunction& psi,
                            const VerdictSettings& s) {
  CriterionReport r;
  r.id = std::move(id);
  r.psi = psi.spec();
  r.settings["slope_slack"] = s.slope_slack;
  r.settings["r2_min"] = s.r2_min;
  return r;
}

}  // namespace

CriterionReport theorem5_verdict(const BernsteinFunction& psi, std::span<const double> t_grid,
                                 const VerdictSettings& settings) {
  CriterionReport r = base_report("theorem5", psi, settings);
  r.route = "theorem5";
  r.trace_columns = {"t", "integral", "t_times_integral", "windowed_monotone"};
  const auto r_grid = geometric(1e-8, 1e2, 241);
  const std::vector<double> u_samples = {1e-6, 1e-4, 1e-2, 1.0};
  std::vector<double> ts, vals;
  bool monotone = true;
  double worst = 0.0;
  try {
    for (double t : t_grid) {
      const auto nu = subordination_measure(psi, t, settings.inversion);
      const double v = theorem5_integral(nu, psi.levy());
      const auto mono = monotone_density_check(nu, r_grid, u_samples);
      monotone = monotone && mono.windowed_monotone;
      if (!mono.windowed_monotone && mono.first_violation) {
        r.notes.push_back("windowed mass increases at t=" + format_number(t) +
                          ", r=" + format_number(mono.first_violation->r));
      }
      r.trace.push_back({t, v, t * v, mono.windowed_monotone ? 1.0 : 0.0});
      worst = std::max(worst, t * v);
      if (v > 0.0) {
        ts.push_back(t);
        vals.push_back(v);
      }
    }
  } catch (const Error& e) {
    if (!is_unavailable(e.code())) throw;
    r.verdict = Verdict::Inapplicable;
    r.notes.emplace_back(e.what());
    return r;
  }
  r.constants["max_t_times_integral"] = worst;
  bool bounded = true;
  if (ts.size() >= 6) {
    r.fit = fit_scaling_exponent(ts, vals, settings.r2_min);
    bounded = r.fit->slope >= -1.0 - settings.slope_slack;
  } else if (ts.size() >= 2) {
    bounded = false;
    r.notes.emplace_back("fewer than 6 positive values; boundedness not assessed");
  }
  r.verdict = bounded && monotone ? Verdict::Pass : Verdict::Fail;
  if (!monotone) r.notes.emplace_back("windowed-monotone density property fails");
  return r;
}

CriterionReport theorem2_verdict(const BernsteinFunction& psi, std::span<const double> t_grid,
                                 const VerdictSettings& settings) {
  CriterionReport r = base_report("theorem2", psi, settings);
  r.settings["max_negative_fraction"] = settings.max_negative_fraction;
  r.trace_columns = {"t", "K_est", "negative_fraction", "K_lower_bound"};
  std::vector<double> ts, ks;
  bool fourier_ran = false;
  double worst_negative = 0.0;
  try {
    for (double t : t_grid) {
      const KEstimate k = k_fourier_estimate(psi, t, settings.k_inversion);
      r.trace.push_back({t, k.K, k.negative_fraction, k_lower_bound(psi, t)});
      ts.push_back(t);
      ks.push_back(k.K);
      worst_negative = std::max(worst_negative, k.negative_fraction);
    }
    fourier_ran = true;
  } catch (const Error& e) {
    if (!is_unavailable(e.code())) throw;
    r.notes.push_back(std::string("Fourier route unavailable: ") + e.what());
    r.trace.clear();
  }
  if (fourier_ran) {
    r.route = "fourier";
    r.fit = fit_scaling_exponent(ts, ks, settings.r2_min);
    r.constants["max_negative_fraction"] = worst_negative;
    const bool ok = r.fit->slope >= -1.0 - settings.slope_slack && !r.fit->poor_fit &&
                    worst_negative <= settings.max_negative_fraction;
    if (ok) {
      r.verdict = Verdict::Pass;
      return r;
    }
    r.notes.emplace_back("Fourier route misses the O(1/t) rule; trying the Theorem 5 route");
  }
  CriterionReport t5 = theorem5_verdict(psi, t_grid, settings);
  if (t5.verdict == Verdict::Inapplicable) {
    if (fourier_ran) {
      r.verdict = Verdict::Fail;
      r.notes.insert(r.notes.end(), t5.notes.begin(), t5.notes.end());
      return r;
    }
    std::string why;
    for (const auto& n : r.notes) why += n + "; ";
    for (const auto& n : t5.notes) why += n + "; ";
    throw Error(ErrorCode::Undecidable, "neither route applies: " + why);
  }
  if (fourier_ran && t5.verdict == Verdict::Fail) {
    r.verdict = Verdict::Fail;
    r.notes.insert(r.notes.end(), t5.notes.begin(), t5.notes.end());
    return r;
  }
  t5.id = "theorem2";
  t5.notes.insert(t5.notes.begin(), r.notes.begin(), r.notes.end());
  t5.settings.insert(r.settings.begin(), r.settings.end());
  return t5;
}

CriterionReport theorem3_verdict(const BernsteinFunction& psi, std::span<const double> t_grid,
                                 double p, const VerdictSettings& settings) {
  CriterionReport r = base_report("theorem3", psi, settings);
  r.route = "hausdorff_young";
  r.constants["p"] = p;
  r.constants["q"] = p / (p - 1.0);
  r.trace_columns = {"t", "Q", "norm_F", "norm_dF"};
  std::vector<double> ts, qs;
  try {
    for (double t : t_grid) {
      const auto v = theorem3_quantity(psi, t, p);
      r.trace.push_back({t, v.value, v.norm_F, v.norm_dF});
      ts.push_back(t);
      qs.push_back(v.value);
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Inapplicable) throw;
    r.verdict = Verdict::Inapplicable;
    r.notes.emplace_back(e.what());
    return r;
  }
  r.fit = fit_scaling_exponent(ts, qs, settings.r2_min);
  r.verdict = r.fit->slope >= -1.0 - settings.slope_slack && !r.fit->poor_fit ? Verdict::Pass
                                                                              : Verdict::Fail;
  return r;
}

double estimate_growth_exponent(const BernsteinFunction& psi) {
  std::vector<double> ys = geometric(1e4, 1e6, 21), ms;
  for (double y : ys) ms.push_back(std::abs(psi(cplx(0.0, y))));
  return log_slope(ys, ms);
}

CriterionReport theorem4_verdict(const BernsteinFunction& psi, const Theorem4Params& params) {
  CriterionReport r;
  r.id = "theorem4";
  r.psi = psi.spec();
  r.route = "parameter_suite";
  const double delta = params.delta.value_or(params.gamma - 1.0);
  r.constants["alpha"] = params.alpha;
  r.constants["gamma"] = params.gamma;
  r.constants["delta"] = delta;
  r.constants["R"] = params.R;
  r.verdict = Verdict::Pass;
  auto fail = [&](const Error& e) {
    r.verdict = Verdict::Fail;
    r.notes.emplace_back(e.what());
  };
  try {
    const auto s = sector_check(psi);
    r.constants["theta"] = s.theta;
    r.constants["beta"] = s.beta;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NotSectorial) throw;
    fail(e);
  }
  try {
    const auto g = growth_check(psi, params.alpha, params.gamma, params.R);
    r.constants["b"] = g.b;
    r.constants["k"] = g.k;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::LowerBoundFails && e.code() != ErrorCode::UpperBoundFails &&
        e.code() != ErrorCode::ParameterOutOfRange) {
      throw;
    }
    fail(e);
  }
  try {
    const auto d = derivative_growth_check(psi, params.alpha, params.gamma, delta, params.R);
    r.constants["k_derivative"] = d.k;
    r.constants["p"] = d.p;
    r.constants["q"] = d.q;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::WindowViolated && e.code() != ErrorCode::BoundFails &&
        e.code() != ErrorCode::ParameterOutOfRange) {
      throw;
    }
    fail(e);
  }
  return r;
}

}  // namespace subord
