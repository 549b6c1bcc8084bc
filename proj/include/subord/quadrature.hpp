#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace subord {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXcd;

/// Knobs for integrals against Lévy measures and subordination measures.
///
/// The half-line is cut into (0, epsilon], dyadic panels [epsilon 2^k, epsilon 2^(k+1)]
/// and a tail [U, inf). U is the first dyadic edge >= 1 at which the tail
/// certificate drops below half the tolerance; it never exceeds tail_cap.
struct QuadratureSpec {
  double epsilon = 1e-8;
  double tail_cap = 65536.0;
  double tol_abs = 1e-11;
  double tol_rel = 1e-11;
  int max_refinements = 400;

  void validate() const;
};

// ---------------------------------------------------------------------------
// Adaptive Gauss-Kronrod (7/15) on a finite interval.

namespace detail {

inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights belonging to kXgk[1], kXgk[3], kXgk[5], kXgk[7].
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

inline double norm_of(double v) { return std::abs(v); }
inline double norm_of(const cplx& v) { return std::abs(v); }
inline double norm_of(const Vec& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

template <class T>
T zero_like(const T& v) {
  if constexpr (std::is_same_v<T, Vec>) {
    return Vec::Zero(v.size());
  } else {
    return T{};
  }
}

template <class T>
struct Panel {
  double a, b;
  T value;
  double error;
};

template <class T, class F>
Panel<T> gk15(const F& f, double a, double b) {
  const double centre = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  T fc = f(centre);
  T kron = fc * kWgk[7];
  T gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    T f1 = f(centre - dx);
    T f2 = f(centre + dx);
    T sum = f1 + f2;
    kron += sum * kWgk[j];
    if (j % 2 == 1) gauss += sum * kWg[j / 2];
  }
  kron *= half;
  gauss *= half;
  double err = norm_of(T(kron - gauss));
  // Roundoff floor: no point in asking for more than ~50 ulps of the panel.
  err = std::max(err, 50.0 * std::numeric_limits<double>::epsilon() * norm_of(kron));
  return {a, b, kron, err};
}

}  // namespace detail

template <class T>
struct AdaptiveResult {
  T value;
  double error = 0.0;
  bool converged = false;
  int subdivisions = 0;
};

/// Globally adaptive G7K15. Bisects the worst panel until the summed error
/// estimate is below max(tol_abs, tol_rel * |I|) or the subdivision cap is hit.
template <class T, class F>
AdaptiveResult<T> gauss_kronrod(const F& f, double a, double b, double tol_abs, double tol_rel,
                                int max_subdivisions = 400) {
  AdaptiveResult<T> out;
  if (a == b) {
    out.value = detail::zero_like(T(f(a)));
    out.converged = true;
    return out;
  }
  std::vector<detail::Panel<T>> panels;
  panels.push_back(detail::gk15<T>(f, a, b));
  T total = panels.front().value;
  double total_err = panels.front().error;
  while (true) {
    const double target = std::max(tol_abs, tol_rel * detail::norm_of(total));
    if (total_err <= target) {
      out.converged = true;
      break;
    }
    if (static_cast<int>(panels.size()) > max_subdivisions) break;
    auto worst = std::max_element(panels.begin(), panels.end(),
                                  [](const auto& l, const auto& r) { return l.error < r.error; });
    const double mid = 0.5 * (worst->a + worst->b);
    if (!(mid > worst->a && mid < worst->b)) break;  // interval exhausted
    auto left = detail::gk15<T>(f, worst->a, mid);
    auto right = detail::gk15<T>(f, mid, worst->b);
    total -= worst->value;
    total_err -= worst->error;
    total += left.value;
    total += right.value;
    total_err += left.error + right.error;
    *worst = std::move(left);
    panels.push_back(std::move(right));
  }
  // Re-sum to shed accumulated cancellation from the running updates.
  total = detail::zero_like(panels.front().value);
  total_err = 0.0;
  for (const auto& p : panels) {
    total += p.value;
    total_err += p.error;
  }
  out.value = total;
  out.error = total_err;
  out.subdivisions = static_cast<int>(panels.size());
  if (!out.converged) {
    out.converged = total_err <= std::max(tol_abs, tol_rel * detail::norm_of(total));
  }
  return out;
}

/// Real integral on [a,b]; throws ToleranceNotMet when the cap is hit.
double integrate(const std::function<double(double)>& f, double a, double b, double tol_abs,
                 double tol_rel, int max_subdivisions = 400);

// ---------------------------------------------------------------------------
// Integration of a vector-valued g against a positive measure on [0, inf).

/// Leading behaviour coef * u^exponent as u -> 0+.
struct PowerLaw {
  double coef = 0.0;
  double exponent = 0.0;
};

/// A positive measure on [0, inf) as seen by the integration driver: exact
/// atoms, an optional density, its small-u power law and a tail functional.
///
/// `tail(U)` must return the integral of the tail weight w over [U, inf)
/// against the absolutely continuous part; the integrand's `at_infinity`
/// coefficient is understood relative to the same w.
struct MeasureView {
  std::vector<std::pair<double, double>> atoms;  // (location >= 0, mass > 0)
  std::function<double(double)> density;
  PowerLaw near_zero;
  std::function<double(double)> tail;
  std::function<double(double)> tail_weight;  // w(u); empty means w = 1
};

struct Integrand {
  Eigen::Index dim = 1;
  std::function<Vec(double)> value;
  /// g(u) ~ at_zero * u^zero_exponent as u -> 0+.
  Vec at_zero;
  double zero_exponent = 0.0;
  /// g(u) ~ at_infinity * w(u) as u -> inf.
  Vec at_infinity;
  /// Bound on sup_{u >= U} |g(u)/w(u) - at_infinity|; sampled when empty.
  std::function<double(double)> tail_deviation;
};

struct MeasureIntegral {
  Vec value;
  double error = 0.0;       // summed estimate: head + panels + tail
  double head_error = 0.0;  // first-order (0, epsilon] treatment
  double tail_error = 0.0;  // certificate on [U, inf)
  double cutoff = 0.0;      // U
};

/// Atoms + head + dyadic adaptive panels + certified tail.
/// Throws ToleranceNotMet or NonIntegrableTail; AtomLimitUndefined when an
/// atom sits at 0 while g(0+) diverges.
MeasureIntegral integrate_measure(const Integrand& g, const MeasureView& mu,
                                  const QuadratureSpec& spec);

}  // namespace subord
