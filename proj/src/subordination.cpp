#include "subord/subordination.hpp"

#include <charconv>
#include <cmath>
#include <numbers>

#include "subord/error.hpp"
#include "subord/special.hpp"

namespace subord {

namespace {

const double kSqrtPi = std::sqrt(std::numbers::pi);

SubordinationMeasure gamma_law(double t, double b, double t_nominal) {
  SubordinationMeasure::ClosedForm form;
  const double log_norm = t * std::log(b) - std::lgamma(t);
  form.density = [t, b, log_norm](double r) {
    return r <= 0.0 ? 0.0 : std::exp(log_norm + (t - 1.0) * std::log(r) - b * r);
  };
  form.near_zero = {std::exp(log_norm), t - 1.0};
  form.cdf = [t, b](double u) { return special::gamma_p(t, b * u); };
  form.survival = [t, b](double u) { return special::gamma_q(t, b * u); };
  return SubordinationMeasure::closed_form(t_nominal, std::move(form),
                                           "gamma(" + format_number(t) + "," + format_number(b) + ")");
}

SubordinationMeasure bessel_law(double t, double b, double t_nominal) {
  const double tilt = b - 1.0;
  const double pref = std::exp(t * std::acosh(b));
  SubordinationMeasure::ClosedForm form;
  form.density = [t, tilt, pref](double r) {
    if (r <= 0.0) return 0.0;
    return pref * std::exp(-tilt * r) * t / r * special::bessel_i_scaled(t, r);
  };
  form.near_zero = {pref * std::exp2(-t) / std::tgamma(t), t - 1.0};
  return SubordinationMeasure::closed_form(t_nominal, std::move(form),
                                           "bessel(" + format_number(t) + "," + format_number(b) + ")");
}

SubordinationMeasure levy_smirnov_law(double t, double c, double t_nominal) {
  const double coef = t / (2.0 * kSqrtPi);
  const double pref = std::exp(t * std::sqrt(c));
  SubordinationMeasure::ClosedForm form;
  form.density = [t, c, coef, pref](double r) {
    if (r <= 0.0) return 0.0;
    return pref * coef * std::exp(-c * r - t * t / (4.0 * r)) * std::pow(r, -1.5);
  };
  form.near_zero = {0.0, 0.0};
  if (c == 0.0) {
    form.cdf = [t](double u) { return u <= 0.0 ? 0.0 : std::erfc(t / (2.0 * std::sqrt(u))); };
    form.survival = [t](double u) { return u <= 0.0 ? 1.0 : std::erf(t / (2.0 * std::sqrt(u))); };
  }
  return SubordinationMeasure::closed_form(
      t_nominal, std::move(form), "levy_smirnov(" + format_number(t) + "," + format_number(c) + ")");
}

double trapezoid_laplace(const SubordinationMeasure& nu, double s) {
  const auto& v = nu.grid_values();
  const double dr = nu.grid_step();
  double sum = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    const double w = (k == 0 || k + 1 == v.size()) ? 0.5 : 1.0;
    sum += w * v[k] * std::exp(s * dr * static_cast<double>(k));
  }
  return sum * dr;
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

SubordinationMeasure nu_closed_form(const BernsteinFunction& psi, double t) {
  if (!(t > 0.0)) throw Error(ErrorCode::ParameterOutOfRange, "t must be > 0");
  // theta psi generates nu_{theta t}.
  const double te = psi.scale() * t;
  return std::visit(
      [&](const auto& k) -> SubordinationMeasure {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, LogShift>) {
          return gamma_law(te, k.b, t);
        } else if constexpr (std::is_same_v<K, AcoshShift>) {
          return bessel_law(te, k.b, t);
        } else if constexpr (std::is_same_v<K, FractionalPower>) {
          if (k.alpha != 0.5) {
            throw Error(ErrorCode::NoClosedForm, "nu_t is closed-form only for alpha = 1/2");
          }
          return levy_smirnov_law(te, k.c, t);
        } else if constexpr (std::is_same_v<K, CustomLevy>) {
          if (!k.terms.empty()) {
            throw Error(ErrorCode::NoClosedForm, "nu_t of a custom density has no closed form");
          }
          return SubordinationMeasure::atoms_only(t, {{k.atom * te, 1.0}},
                                                  "point_mass(" + format_number(k.atom * te) + ")");
        } else {
          throw Error(ErrorCode::NoClosedForm, "nu_t of the mixed example has no closed form");
        }
      },
      psi.kind());
}

SubordinationMeasure nu_fourier_inversion(const BernsteinFunction& psi, double t,
                                          const InversionParams& params,
                                          InversionDiagnostics* diagnostics) {
  if (!(t > 0.0)) throw Error(ErrorCode::ParameterOutOfRange, "t must be > 0");
  auto symbol = [&psi, t](cplx lambda) { return std::exp(t * psi(cplx(0.0, 1.0) * lambda)); };
  InvertedSignal sig = invert_fourier(symbol, params);
  if (sig.imag_residue > 1e-6) {
    throw Error(ErrorCode::ToleranceNotMet,
                "imaginary residue " + std::to_string(sig.imag_residue) + " of the peak");
  }
  const std::size_t origin = sig.origin();
  std::vector<double> positive(sig.values.begin() + static_cast<std::ptrdiff_t>(origin),
                               sig.values.end());
  if (diagnostics) {
    double neg = 0.0;
    for (std::size_t j = 0; j < origin; ++j) neg += std::abs(sig.values[j]);
    double pos = 0.0;
    for (std::size_t k = 0; k < positive.size(); ++k) {
      pos += (k == 0 || k + 1 == positive.size() ? 0.5 : 1.0) * positive[k];
    }
    diagnostics->negative_mass = neg * sig.dr;
    diagnostics->grid_mass = pos * sig.dr;
  }
  const double dr = sig.dr;
  auto nu = SubordinationMeasure::grid(t, dr, std::move(positive), 1.0,
                                       "fourier(" + psi.spec() + "," + format_number(t) + ")");
  if (diagnostics) diagnostics->signal = std::move(sig);
  return nu;
}

SubordinationMeasure subordination_measure(const BernsteinFunction& psi, double t,
                                           const InversionParams& params) {
  try {
    return nu_closed_form(psi, t);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoClosedForm) throw;
  }
  return nu_fourier_inversion(psi, t, params);
}

double laplace_transform(const SubordinationMeasure& nu, double s, const QuadratureSpec& spec) {
  if (s > 0.0) throw Error(ErrorCode::DomainError, "Laplace transform needs s <= 0");
  double atoms = 0.0;
  for (const auto& [loc, mass] : nu.atoms()) atoms += mass * std::exp(s * loc);
  if (!nu.has_density()) return atoms;
  if (nu.repr() == SubordinationMeasure::Repr::GridDensity) return atoms + trapezoid_laplace(nu, s);

  Integrand g;
  g.value = [s](double u) { return Vec::Constant(1, std::exp(s * u)); };
  g.at_zero = Vec::Ones(1);
  g.at_infinity = Vec::Constant(1, s == 0.0 ? 1.0 : 0.0);
  g.tail_deviation = [s](double U) { return s == 0.0 ? 0.0 : std::exp(s * U); };
  MeasureView view = nu.view();
  view.atoms.clear();
  return atoms + integrate_measure(g, view, spec).value(0).real();
}

double laplace_check(const SubordinationMeasure& nu, const BernsteinFunction& psi,
                     std::span<const double> s_grid, const QuadratureSpec& spec) {
  double worst = 0.0;
  for (double s : s_grid) {
    const double expected = std::exp(nu.t() * psi(s).real());
    const double got = laplace_transform(nu, s, spec);
    worst = std::max(worst, std::abs(got - expected) / (1.0 + expected));
  }
  return worst;
}

double convolution_check(const BernsteinFunction& psi, double t, double s,
                         std::span<const double> s_grid, const InversionParams& params,
                         const QuadratureSpec& spec) {
  if (!(t > 0.0 && s > 0.0)) throw Error(ErrorCode::ParameterOutOfRange, "t, s must be > 0");
  const auto a = subordination_measure(psi, t, params);
  const auto b = subordination_measure(psi, s, params);
  const auto ab = subordination_measure(psi, t + s, params);
  double worst = 0.0;
  for (double x : s_grid) {
    const double lhs = laplace_transform(a, x, spec) * laplace_transform(b, x, spec);
    worst = std::max(worst, std::abs(lhs - laplace_transform(ab, x, spec)));
  }
  return worst;
}

MonotoneVerdict monotone_density_check(const SubordinationMeasure& nu,
                                       std::span<const double> r_grid,
                                       std::span<const double> u_samples, double slack) {
  MonotoneVerdict v;
  if (!nu.has_density()) {
    throw Error(ErrorCode::Inapplicable, "monotonicity check needs a density");
  }
  for (double u : u_samples) {
    double prev = 0.0;
    bool have_prev = false;
    for (double r : r_grid) {
      if (r < u) continue;
      const double m = nu.mass_between(r - u, r);
      if (have_prev && m > prev + slack) {
        if (v.windowed_monotone) v.first_violation = MonotoneVerdict::Violation{u, r, m - prev};
        v.windowed_monotone = false;
        break;
      }
      prev = m;
      have_prev = true;
    }
  }
  for (std::size_t i = 0; i + 1 < r_grid.size(); ++i) {
    if (r_grid[i] <= 0.0) continue;
    if (nu.density(r_grid[i + 1]) > nu.density(r_grid[i]) + slack) {
      v.density_monotone = false;
      break;
    }
  }
  return v;
}

void write_density_csv(std::ostream& out, const SubordinationMeasure& nu,
                       std::span<const double> r_grid) {
  out << "r,f_t\n";
  for (double r : r_grid) out << format_number(r) << ',' << format_number(nu.density(r)) << '\n';
}

}  // namespace subord
