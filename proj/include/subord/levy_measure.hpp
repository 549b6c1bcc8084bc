#pragma once

#include <functional>
#include <string>

#include "subord/quadrature.hpp"

namespace subord {

/// Positive measure rho on [0, inf) in psi(z) = int (e^{zu} - 1) u^{-1} drho(u).
///
/// An atom at 0 contributes atom_at_zero * z (the integrand's value at u = 0).
/// The absolutely continuous part carries its small-u power law and the
/// closed or numerically evaluated tail U -> int_[U,inf) u^{-1} drho(u),
/// which the integration driver needs to certify tails.
struct LevyMeasure {
  double atom_at_zero = 0.0;
  std::function<double(double)> density;
  PowerLaw near_zero;
  std::function<double(double)> inverse_moment_tail;

  bool has_density() const { return static_cast<bool>(density); }

  /// View for integrands whose far-field behaviour is at_infinity * u^{-1}.
  MeasureView view() const;

  /// Numeric values of int_(0,1] drho and int_[1,inf) u^{-1} drho.
  struct Certificates {
    double mass_unit_interval = 0.0;
    double inverse_moment_tail = 0.0;
  };
  Certificates certificates(const QuadratureSpec& spec = {}) const;
};

/// int_U^inf f(u) du for an exponentially decaying f, summed over dyadic
/// panels until they stop contributing.
double dyadic_tail(const std::function<double(double)>& f, double U);

}  // namespace subord
