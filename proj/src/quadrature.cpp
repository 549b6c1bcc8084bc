#include "subord/quadrature.hpp"

#include <string>

#include "subord/error.hpp"

namespace subord {

void QuadratureSpec::validate() const {
  if (!(epsilon > 0.0 && epsilon < 1.0 && tail_cap > 1.0)) {
    throw Error(ErrorCode::ParameterOutOfRange, "quadrature spec needs 0 < epsilon < 1 < tail_cap");
  }
  if (!(tol_abs > 0.0 && tol_rel > 0.0) || max_refinements < 1) {
    throw Error(ErrorCode::ParameterOutOfRange, "quadrature tolerances must be positive");
  }
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol_abs,
                 double tol_rel, int max_subdivisions) {
  auto r = gauss_kronrod<double>(f, a, b, tol_abs, tol_rel, max_subdivisions);
  if (!r.converged) {
    throw Error(ErrorCode::ToleranceNotMet,
                "adaptive quadrature on [" + std::to_string(a) + ", " + std::to_string(b) +
                    "] stopped with error " + std::to_string(r.error));
  }
  return r.value;
}

namespace {

double sampled_deviation(const Integrand& g, const MeasureView& mu, double U) {
  double dev = 0.0;
  double u = U;
  for (int j = 0; j <= 16; ++j, u *= 2.0) {
    const double w = mu.tail_weight ? mu.tail_weight(u) : 1.0;
    if (w == 0.0) continue;
    dev = std::max(dev, detail::norm_of(Vec(g.value(u) / w - g.at_infinity)));
  }
  return dev;
}

}  // namespace

MeasureIntegral integrate_measure(const Integrand& g, const MeasureView& mu,
                                  const QuadratureSpec& spec) {
  spec.validate();
  MeasureIntegral out;
  out.value = Vec::Zero(g.dim);

  for (const auto& [loc, mass] : mu.atoms) {
    if (mass == 0.0) continue;
    if (loc == 0.0) {
      if (g.zero_exponent < 0.0 && detail::norm_of(g.at_zero) > 0.0) {
        throw Error(ErrorCode::AtomLimitUndefined, "integrand diverges at an atom located at 0");
      }
      if (g.zero_exponent == 0.0) out.value += mass * g.at_zero;
    } else {
      out.value += mass * g.value(loc);
    }
  }

  if (!mu.density) return out;
  if (!mu.tail) {
    throw Error(ErrorCode::NonIntegrableTail, "measure view has a density but no tail functional");
  }

  const double eps = spec.epsilon;
  const double tol_abs = spec.tol_abs;
  const double tol_rel = spec.tol_rel;

  // (0, eps]: power-law head, first order in the deviation of g and of the density.
  {
    const double a = mu.near_zero.exponent;
    const double q = g.zero_exponent;
    const double coef = mu.near_zero.coef;
    Vec g_eps = g.value(eps);
    const double rho_eps = mu.density(eps);
    if (coef != 0.0) {
      if (!(q + a > -1.0)) {
        throw Error(ErrorCode::NonIntegrableTail, "integrand not integrable at 0 against the measure");
      }
      const double p = q + a + 1.0;
      const double head_mass = coef * std::pow(eps, p) / p;
      Vec head = g.at_zero * head_mass;
      out.value += head;
      const double model_g = std::pow(eps, q);
      const double g_dev = detail::norm_of(Vec(g_eps - g.at_zero * model_g));
      const double rho_model = coef * std::pow(eps, a);
      const double rho_rel = rho_model != 0.0 ? std::abs(rho_eps / rho_model - 1.0) : 0.0;
      out.head_error = g_dev / model_g * std::abs(head_mass) + detail::norm_of(head) * rho_rel;
    } else {
      out.head_error = detail::norm_of(g_eps) * rho_eps * eps;
    }
  }

  auto weighted = [&](double u) -> Vec {
    const double rho = mu.density(u);
    if (rho == 0.0) return Vec::Zero(g.dim);
    return g.value(u) * rho;
  };

  const double panel_abs = tol_abs / 64.0;
  double panel_err = 0.0;
  bool all_converged = true;
  double lo = eps;
  while (true) {
    const double hi = 2.0 * lo;
    auto r = gauss_kronrod<Vec>(weighted, lo, hi, panel_abs, tol_rel, spec.max_refinements);
    out.value += r.value;
    panel_err += r.error;
    all_converged = all_converged && r.converged;
    lo = hi;
    if (lo < 1.0) continue;

    const double target = std::max(tol_abs, tol_rel * detail::norm_of(out.value));
    const double tail_w = mu.tail(lo);
    const double dev = g.tail_deviation ? g.tail_deviation(lo) : sampled_deviation(g, mu, lo);
    const double cert = dev * std::abs(tail_w);
    if (cert <= 0.5 * target || (lo >= spec.tail_cap && cert <= target)) {
      out.value += g.at_infinity * tail_w;
      out.tail_error = cert;
      out.cutoff = lo;
      break;
    }
    if (lo >= spec.tail_cap) {
      throw Error(ErrorCode::NonIntegrableTail,
                  "tail certificate " + std::to_string(cert) + " above tolerance at U = " +
                      std::to_string(lo));
    }
  }

  out.error = out.head_error + panel_err + out.tail_error;
  const double target = std::max(tol_abs, tol_rel * detail::norm_of(out.value));
  if (!all_converged && out.error > 10.0 * target) {
    throw Error(ErrorCode::ToleranceNotMet,
                "refinement cap reached with error " + std::to_string(out.error));
  }
  return out;
}

}  // namespace subord
