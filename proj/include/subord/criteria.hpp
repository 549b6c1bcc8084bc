#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "subord/bernstein.hpp"
#include "subord/fourier.hpp"
#include "subord/quadrature.hpp"

namespace subord {

/// F_t(y) = e^{t psi(iy)} psi(iy) and its y-derivative on a symmetric grid.
///
/// The positive half is geometric from y_lo to y_max; weights integrate
/// over the grid (the head [0, y_lo] and the tail are left to lp_norm).
struct SymbolProfile {
  double t = 0.0;
  std::vector<double> y;
  std::vector<double> weights;
  std::vector<cplx> F;
  std::vector<cplx> dF;
  bool no_decay = false;  // |F(y_max)| never fell below the floor
};

/// y_max <= 0 picks the frequency where |F| drops below decay_floor * peak.
SymbolProfile compute_symbol(const BernsteinFunction& psi, double t, double y_max = 0.0,
                             std::size_t n_points = 4000, double decay_floor = 1e-12);

enum class TailFit { None, Head, HeadAndTail };

/// (sum w |v|^p)^{1/p}. Power laws fitted over the first (last) decade of |y|
/// on each side of 0 supply the head [0, y_lo] (the tail beyond the grid);
/// a non-integrable fit throws Divergent. Empty weights mean trapezoid
/// weights on `grid`.
double lp_norm(std::span<const double> values, std::span<const double> grid, double p,
               std::span<const double> weights = {}, TailFit fit = TailFit::None);

struct Theorem3Value {
  double value = 0.0;
  double norm_F = 0.0;
  double norm_dF = 0.0;
  double p = 2.0;
  double q = 2.0;
};

/// ||F_t||_p^{1/q} ||dF_t/dy||_p^{1/p}; Inapplicable when a norm diverges.
Theorem3Value theorem3_quantity(const BernsteinFunction& psi, double t, double p);

struct KEstimate {
  double K = 0.0;                  // ||b_t||_1 = (2 pi)^{-1/2} ||f_t||_1
  double negative_fraction = 0.0;  // int_{r<0} |b_t| / ||b_t||_1
  double tail_fraction = 0.0;      // Levy-matched tail beyond the window / K
  double norm_q = 0.0;             // ||f_t||_q for the q passed in
  double lambda_max = 0.0;
  std::size_t grid = 0;
};

/// Window long enough (r_max = 1024) for the tail of b_t to be a clean power law.
InversionParams k_inversion_params();

/// b_t = d nu_t/dt from F_t by inverse FFT. NoDecay, GridTooCoarse.
KEstimate k_fourier_estimate(const BernsteinFunction& psi, double t,
                             const InversionParams& params = k_inversion_params(), double q = 2.0);

/// Inverse transform of F_t on the full window (negative r included).
InvertedSignal fourier_density(const BernsteinFunction& psi, double t,
                               const InversionParams& params = {});

/// max over a fixed family of 50 exponential polynomials phi with sup|phi| = 1
/// of |int phi b_t| = |sum c_j psi(s_j) e^{t psi(s_j)}|.
double k_lower_bound(const BernsteinFunction& psi, double t);

struct SectorSamples {
  std::vector<double> ray_args;  // arg(-z); empty means {0, +-pi/4, +-(pi/2 - edge)}
  double edge = 1e-4;
  double r_min = 1e-3;
  double r_max = 1e6;
  int per_decade = 10;
  int theta_points = 200;  // theta_j = j pi / (2 (theta_points + 1))
  double beta_max = 10.0;
  double beta_step = 0.1;

  std::vector<cplx> points() const;
};

struct SectorResult {
  double theta = 0.0;  // grid angle achieved at beta
  double beta = 0.0;
  double needed = 0.0;  // max |arg(beta - psi(z))| over the samples
};

/// Smallest beta on the grid admitting a grid theta below pi/2 - 1e-3, and
/// the smallest such theta at that beta. NotSectorial when no beta does.
SectorResult sector_check(const BernsteinFunction& psi, const SectorSamples& samples = {});
bool sector_contains(const BernsteinFunction& psi, double theta, double beta,
                     const SectorSamples& samples = {});

struct GrowthSamples {
  std::vector<double> ray_args;  // as SectorSamples
  double edge = 1e-4;
  double decades = 4.0;  // |z| in [R, R 10^decades]
  int per_decade = 10;
};

struct GrowthResult {
  double b = 0.0;  // min |psi(z)| / |z|^alpha
  double k = 0.0;  // max |psi(z)| / |z|^gamma
  std::vector<double> decade_min;
  std::vector<double> decade_max;
};

/// LowerBoundFails / UpperBoundFails when the decade-wise extreme ratios
/// drift steadily (more than 10% over the last three decades) or b vanishes.
GrowthResult growth_check(const BernsteinFunction& psi, double alpha, double gamma, double R,
                          const GrowthSamples& samples = {});

struct DerivativeGrowth {
  double k = 0.0;  // max |psi'(iy)| / |y|^delta over |y| >= R
  double p = 2.0;
  double q = 2.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  double lp_head = 0.0;  // ||psi'(i.)||_p on [0, R]
};

/// Checks the delta window, computes p and the bound. WindowViolated, BoundFails.
DerivativeGrowth derivative_growth_check(const BernsteinFunction& psi, double alpha, double gamma,
                                         double delta, double R, const GrowthSamples& samples = {});

/// p from the exponents: min{2, 1/(alpha-gamma-delta), (alpha-delta-1)/(gamma-alpha)}
/// when alpha < gamma, the midpoint of (1, min{2, 1/(1-gamma)}) when equal.
double p_rule(double alpha, double gamma, double delta);

struct ScalingFit {
  double slope = 0.0;
  double r2 = 0.0;
  bool poor_fit = false;
};

ScalingFit fit_scaling_exponent(std::span<const double> ts, std::span<const double> qs,
                                double r2_min = 0.98);

enum class Verdict { Pass, Fail, Inapplicable };
std::string_view to_string(Verdict v) noexcept;

struct CriterionReport {
  std::string id;
  std::string psi;
  Verdict verdict = Verdict::Inapplicable;
  std::string route;
  std::optional<ScalingFit> fit;
  std::map<std::string, double> constants;
  std::map<std::string, double> settings;
  std::vector<std::string> notes;
  std::vector<std::string> trace_columns;  // first column is the abscissa
  std::vector<std::vector<double>> trace;
};

struct VerdictSettings {
  double slope_slack = 0.1;
  double r2_min = 0.98;
  double max_negative_fraction = 1e-3;
  InversionParams inversion;  // nu_t
  InversionParams k_inversion = k_inversion_params();
};

/// Fourier route first; the Theorem 5 route when F_t does not decay. Fail when
/// a route runs and misses; Undecidable when neither can run.
CriterionReport theorem2_verdict(const BernsteinFunction& psi, std::span<const double> t_grid,
                                 const VerdictSettings& settings = {});

/// t int nu_t([0,u)) u^{-1} drho(u) bounded (slope >= -1 - slack) and the
/// windowed-monotone density property at every t.
CriterionReport theorem5_verdict(const BernsteinFunction& psi, std::span<const double> t_grid,
                                 const VerdictSettings& settings = {});

/// Slope of theorem3_quantity over t_grid.
CriterionReport theorem3_verdict(const BernsteinFunction& psi, std::span<const double> t_grid,
                                 double p, const VerdictSettings& settings = {});

struct Theorem4Params {
  double alpha = 0.0;
  double gamma = 0.0;
  std::optional<double> delta;  // gamma - 1 when alpha = gamma
  double R = 1.0;
};

/// Fitted |psi(iy)| growth exponent over |y| in [1e4, 1e6].
double estimate_growth_exponent(const BernsteinFunction& psi);

CriterionReport theorem4_verdict(const BernsteinFunction& psi, const Theorem4Params& params);

}  // namespace subord
