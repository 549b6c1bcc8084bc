#pragma once

namespace subord::special {

/// e^{-x} I_nu(x) for nu >= 0, x >= 0. Switches to the large-argument
/// expansion above x = 40 where cyl_bessel_i would overflow.
double bessel_i_scaled(double nu, double x);

/// Density of the one-sided stable law with Laplace transform exp(-s^beta),
/// 0 < beta < 1. Kanter's integral for moderate x, the convergent power
/// series in x^{-beta} for large x.
double stable_density(double beta, double x);

/// P(X >= x) for the same law.
double stable_survival(double beta, double x);

/// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);
/// Regularized upper incomplete gamma Q(a, x).
double gamma_q(double a, double x);

}  // namespace subord::special
