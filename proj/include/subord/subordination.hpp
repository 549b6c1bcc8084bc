#pragma once

#include <optional>
#include <ostream>
#include <span>
#include <string>

#include "subord/bernstein.hpp"
#include "subord/fourier.hpp"
#include "subord/subordination_measure.hpp"

namespace subord {

/// Gamma for log(b), the Bessel law for acosh(b) (tilted when b > 1), the
/// Levy-Smirnov law for frac(1/2, c) (tilted when c > 0) and the point mass
/// at a0 t for a pure-drift custom measure. NoClosedForm otherwise.
SubordinationMeasure nu_closed_form(const BernsteinFunction& psi, double t);

struct InversionDiagnostics {
  InvertedSignal signal;   // full window, negative r included
  double negative_mass = 0.0;  // int_{r<0} |f|
  double grid_mass = 0.0;      // int_{r>=0} f over the window
};

/// Density of nu_t from its characteristic function e^{t psi(i lambda)}.
SubordinationMeasure nu_fourier_inversion(const BernsteinFunction& psi, double t,
                                          const InversionParams& params = {},
                                          InversionDiagnostics* diagnostics = nullptr);

/// Closed form when available, Fourier inversion otherwise.
SubordinationMeasure subordination_measure(const BernsteinFunction& psi, double t,
                                           const InversionParams& params = {});

/// int e^{s u} d nu(u) for s <= 0.
double laplace_transform(const SubordinationMeasure& nu, double s, const QuadratureSpec& spec = {});

/// max_s |L nu(s) - e^{t psi(s)}| / (1 + e^{t psi(s)}).
double laplace_check(const SubordinationMeasure& nu, const BernsteinFunction& psi,
                     std::span<const double> s_grid, const QuadratureSpec& spec = {});

/// max_s |L nu_t(s) L nu_s(s) - L nu_{t+s}(s)|, each measure built and
/// integrated independently.
double convolution_check(const BernsteinFunction& psi, double t, double s,
                         std::span<const double> s_grid, const InversionParams& params = {},
                         const QuadratureSpec& spec = {});

struct MonotoneVerdict {
  bool windowed_monotone = true;  // r -> nu([r-u, r)) non-increasing for every u
  bool density_monotone = true;
  struct Violation {
    double u = 0.0;
    double r = 0.0;
    double increase = 0.0;
  };
  std::optional<Violation> first_violation;
};

MonotoneVerdict monotone_density_check(const SubordinationMeasure& nu,
                                       std::span<const double> r_grid,
                                       std::span<const double> u_samples, double slack = 1e-10);

/// Two columns "r,f_t" with a header.
void write_density_csv(std::ostream& out, const SubordinationMeasure& nu,
                       std::span<const double> r_grid);

/// Locale-independent shortest round-trip formatting.
std::string format_number(double v);

}  // namespace subord
