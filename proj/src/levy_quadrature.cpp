#include "subord/levy_quadrature.hpp"

#include <cmath>

#include "subord/error.hpp"

namespace subord {

LevyIntegral levy_integral(const LevyIntegrand& g, const LevyMeasure& rho,
                           const QuadratureSpec& spec) {
  Integrand v;
  v.dim = 1;
  v.value = [f = g.g](double u) { return Vec::Constant(1, f(u)); };
  v.at_zero = Vec::Constant(1, g.limit_at_zero);
  v.at_infinity = Vec::Constant(1, g.limit_u_g);
  v.tail_deviation = g.tail_deviation;
  const auto r = integrate_measure(v, rho.view(), spec);
  return {r.value(0), r.error, r.cutoff};
}

MeasureIntegral levy_integral(const Integrand& g, const LevyMeasure& rho,
                              const QuadratureSpec& spec) {
  return integrate_measure(g, rho.view(), spec);
}

double verify_representation(const BernsteinFunction& psi, std::span<const double> s_grid,
                             const QuadratureSpec& spec) {
  if (!psi.has_closed_form()) {
    throw Error(ErrorCode::NoClosedForm, "representation check needs a closed-form psi");
  }
  double worst = 0.0;
  for (double s : s_grid) {
    if (s > 0.0) throw Error(ErrorCode::DomainError, "representation grid must be <= 0");
    const cplx closed = psi(s);
    const cplx quad = psi_by_quadrature(psi.levy(), s, spec);
    worst = std::max(worst, std::abs(closed - quad) / (1.0 + std::abs(closed)));
  }
  return worst;
}

QuadratureSpec theorem5_spec() {
  QuadratureSpec s;
  s.tol_abs = 1e-10;
  s.tol_rel = 1e-10;
  s.tail_cap = std::ldexp(1.0, 44);
  return s;
}

double theorem5_integral(const SubordinationMeasure& nu, const LevyMeasure& rho,
                         const QuadratureSpec& spec) {
  // nu([0,u)) ~ coef u^{e+1}/(e+1) near 0, so the integrand behaves like u^e.
  const PowerLaw head = nu.has_density() ? nu.near_zero() : PowerLaw{};
  bool atom_at_origin = false;
  for (const auto& a : nu.atoms()) atom_at_origin = atom_at_origin || a.first == 0.0;
  if (atom_at_origin && rho.atom_at_zero > 0.0) {
    throw Error(ErrorCode::AtomLimitUndefined, "nu has an atom at 0 and rho has an atom at 0");
  }

  Integrand g;
  g.dim = 1;
  g.value = [&nu](double u) { return Vec::Constant(1, nu.cdf(u) / u); };
  if (head.coef != 0.0) {
    g.zero_exponent = head.exponent;
    g.at_zero = Vec::Constant(1, head.coef / (head.exponent + 1.0));
  } else {
    g.at_zero = Vec::Zero(1);
  }
  const double total = nu.mass();
  g.at_infinity = Vec::Constant(1, total);
  g.tail_deviation = [&nu, total](double U) { return std::max(total - nu.cdf(U), 0.0); };

  try {
    return integrate_measure(g, rho.view(), spec).value(0).real();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::AtomLimitUndefined) {
      throw Error(ErrorCode::AtomLimitUndefined,
                  "density of nu_t diverges at 0 while rho has an atom at 0");
    }
    throw;
  }
}

}  // namespace subord
