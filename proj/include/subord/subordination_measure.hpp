#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "subord/quadrature.hpp"

namespace subord {

/// The measure nu_t of the convolution semigroup with Laplace transform
/// e^{t psi}: a density (closed form or uniform grid), exact atoms, or both.
///
/// Densities are plain (non-unitary) so that the Laplace transform of the
/// measure is e^{t psi} with no extra factors. Immutable after construction.
class SubordinationMeasure {
 public:
  enum class Repr { ClosedFormDensity, GridDensity, Atoms, Mixture };

  struct ClosedForm {
    std::function<double(double)> density;
    PowerLaw near_zero;
    double ac_mass = 1.0;
    /// Optional closed forms; tabulated numerically when absent.
    std::function<double(double)> cdf;       // nu_ac([0,u))
    std::function<double(double)> survival;  // nu_ac([u,inf))
  };

  static SubordinationMeasure closed_form(double t, ClosedForm form, std::string label);
  static SubordinationMeasure atoms_only(double t, std::vector<std::pair<double, double>> atoms,
                                         std::string label);
  /// Uniform grid r_k = k * dr, k = 0..n-1, linear interpolation. Mass beyond
  /// the grid is the deficit expected_ac_mass - int grid.
  static SubordinationMeasure grid(double t, double dr, std::vector<double> values,
                                   double expected_ac_mass, std::string label);

  double t() const { return t_; }
  Repr repr() const;
  const std::string& label() const { return label_; }
  const std::vector<std::pair<double, double>>& atoms() const { return atoms_; }

  bool has_density() const { return static_cast<bool>(density_); }
  double density(double r) const;
  PowerLaw near_zero() const { return near_zero_; }

  /// nu([0,u)), atoms included.
  double cdf(double u) const;
  /// nu([lo,hi)), atoms included; integrates the density directly.
  double mass_between(double lo, double hi) const;
  /// Total mass, atoms included.
  double mass() const;
  /// nu_ac([u,inf)).
  double ac_survival(double u) const;

  /// Grid data when repr() is GridDensity.
  double grid_step() const { return grid_dr_; }
  const std::vector<double>& grid_values() const { return grid_values_; }

  /// View with tail weight 1 for the integration driver.
  MeasureView view() const;

 private:
  SubordinationMeasure() = default;
  double ac_cdf(double u) const;
  void build_cdf_table();

  double t_ = 0.0;
  std::string label_;
  std::vector<std::pair<double, double>> atoms_;
  std::function<double(double)> density_;
  PowerLaw near_zero_;
  double ac_mass_ = 0.0;
  std::function<double(double)> cdf_closed_;
  std::function<double(double)> survival_closed_;

  // Cumulative table at geometric knots for numerically integrated cdfs.
  std::shared_ptr<const std::vector<std::pair<double, double>>> cdf_table_;

  double grid_dr_ = 0.0;
  std::vector<double> grid_values_;
  std::vector<double> grid_cumulative_;
};

}  // namespace subord
