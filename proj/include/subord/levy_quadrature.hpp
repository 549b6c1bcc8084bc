#pragma once

#include <functional>
#include <span>

#include "subord/bernstein.hpp"
#include "subord/levy_measure.hpp"
#include "subord/quadrature.hpp"
#include "subord/subordination_measure.hpp"

namespace subord {

/// Scalar integrand against a Levy measure. `limit_at_zero` is g(0+);
/// `limit_u_g` is lim u g(u) as u -> inf (the tail is certified against
/// int_[U,inf) u^{-1} drho).
struct LevyIntegrand {
  std::function<cplx(double)> g;
  cplx limit_at_zero = 0.0;
  cplx limit_u_g = 0.0;
  /// sup_{u >= U} |u g(u) - limit_u_g|; sampled when empty.
  std::function<double(double)> tail_deviation;
};

struct LevyIntegral {
  cplx value;
  double error = 0.0;
  double cutoff = 0.0;
};

/// a0 g(0+) + int g drho_ac.
LevyIntegral levy_integral(const LevyIntegrand& g, const LevyMeasure& rho,
                           const QuadratureSpec& spec = {});

/// Vector-valued version; error control is the max over entries.
MeasureIntegral levy_integral(const Integrand& g, const LevyMeasure& rho,
                              const QuadratureSpec& spec = {});

/// max_s |closed form - quadrature| / (1 + |psi(s)|).
double verify_representation(const BernsteinFunction& psi, std::span<const double> s_grid,
                             const QuadratureSpec& spec = {});

/// Defaults for theorem5_integral. Heavy-tailed nu_t has nu([U,inf)) ~ U^{-1/2},
/// so the tail certificate needs cutoffs far beyond 2^16.
QuadratureSpec theorem5_spec();

/// int nu([0,u)) u^{-1} drho(u), integrating the cdf of nu against rho.
double theorem5_integral(const SubordinationMeasure& nu, const LevyMeasure& rho,
                         const QuadratureSpec& spec = theorem5_spec());

}  // namespace subord
