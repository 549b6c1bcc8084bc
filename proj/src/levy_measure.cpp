#include "subord/levy_measure.hpp"

#include <cmath>

#include "subord/error.hpp"

namespace subord {

MeasureView LevyMeasure::view() const {
  MeasureView v;
  if (atom_at_zero > 0.0) v.atoms.emplace_back(0.0, atom_at_zero);
  v.density = density;
  v.near_zero = near_zero;
  v.tail = inverse_moment_tail;
  v.tail_weight = [](double u) { return 1.0 / u; };
  return v;
}

LevyMeasure::Certificates LevyMeasure::certificates(const QuadratureSpec& spec) const {
  Certificates c;
  if (!has_density()) return c;
  Integrand one;
  one.dim = 1;
  one.value = [](double) { return Vec::Ones(1); };
  one.at_zero = Vec::Ones(1);
  // Only (0,1] is wanted: cut the measure off at 1 and give it an empty tail.
  MeasureView head = view();
  head.atoms.clear();
  head.density = [d = density](double u) { return u <= 1.0 ? d(u) : 0.0; };
  head.tail = [](double) { return 0.0; };
  one.at_infinity = Vec::Zero(1);
  one.tail_deviation = [](double) { return 0.0; };
  c.mass_unit_interval = integrate_measure(one, head, spec).value(0).real();
  c.inverse_moment_tail = inverse_moment_tail(1.0);
  if (!std::isfinite(c.mass_unit_interval) || !std::isfinite(c.inverse_moment_tail)) {
    throw Error(ErrorCode::NonIntegrableTail, "Levy measure integrability certificates diverge");
  }
  return c;
}

double dyadic_tail(const std::function<double(double)>& f, double U) {
  double sum = 0.0;
  double lo = U;
  int quiet = 0;
  for (int k = 0; k < 200 && quiet < 2; ++k) {
    const double hi = 2.0 * lo;
    const double part = gauss_kronrod<double>(f, lo, hi, 1e-300, 1e-13, 400).value;
    sum += part;
    quiet = std::abs(part) <= 1e-17 * std::abs(sum) || part == 0.0 ? quiet + 1 : 0;
    lo = hi;
  }
  return sum;
}

}  // namespace subord
