#include "subord/subordination_measure.hpp"

#include <algorithm>
#include <cmath>

#include "subord/error.hpp"

namespace subord {

namespace {

constexpr double kHeadCut = 1e-12;
constexpr double kTableEnd = 1e4;

double power_head(const PowerLaw& law, double upto) {
  if (law.coef == 0.0 || upto <= 0.0) return 0.0;
  const double p = law.exponent + 1.0;
  if (!(p > 0.0)) throw Error(ErrorCode::NonIntegrableTail, "density not integrable at 0");
  return law.coef * std::pow(upto, p) / p;
}

double panel_integral(const std::function<double(double)>& f, double lo, double hi) {
  double sum = 0.0;
  while (lo < hi) {
    const double next = std::min(hi, 2.0 * lo);
    sum += gauss_kronrod<double>(f, lo, next, 1e-17, 1e-13, 400).value;
    lo = next;
  }
  return sum;
}

}  // namespace

SubordinationMeasure SubordinationMeasure::closed_form(double t, ClosedForm form,
                                                       std::string label) {
  if (!form.density) throw Error(ErrorCode::ParameterOutOfRange, "closed form needs a density");
  SubordinationMeasure m;
  m.t_ = t;
  m.label_ = std::move(label);
  m.density_ = std::move(form.density);
  m.near_zero_ = form.near_zero;
  m.ac_mass_ = form.ac_mass;
  m.cdf_closed_ = std::move(form.cdf);
  m.survival_closed_ = std::move(form.survival);
  if (!m.cdf_closed_) m.build_cdf_table();
  return m;
}

SubordinationMeasure SubordinationMeasure::atoms_only(
    double t, std::vector<std::pair<double, double>> atoms, std::string label) {
  SubordinationMeasure m;
  m.t_ = t;
  m.label_ = std::move(label);
  for (const auto& [loc, mass] : atoms) {
    if (loc < 0.0 || mass <= 0.0) {
      throw Error(ErrorCode::ParameterOutOfRange, "atoms need location >= 0 and mass > 0");
    }
  }
  m.atoms_ = std::move(atoms);
  return m;
}

SubordinationMeasure SubordinationMeasure::grid(double t, double dr, std::vector<double> values,
                                                double expected_ac_mass, std::string label) {
  if (!(dr > 0.0) || values.size() < 2) {
    throw Error(ErrorCode::ParameterOutOfRange, "grid density needs dr > 0 and two samples");
  }
  SubordinationMeasure m;
  m.t_ = t;
  m.label_ = std::move(label);
  for (double& v : values) v = std::max(v, 0.0);
  m.grid_dr_ = dr;
  m.grid_values_ = std::move(values);
  m.grid_cumulative_.assign(m.grid_values_.size(), 0.0);
  for (std::size_t k = 1; k < m.grid_values_.size(); ++k) {
    m.grid_cumulative_[k] =
        m.grid_cumulative_[k - 1] + 0.5 * dr * (m.grid_values_[k - 1] + m.grid_values_[k]);
  }
  m.ac_mass_ = std::max(expected_ac_mass, m.grid_cumulative_.back());
  m.near_zero_ = PowerLaw{m.grid_values_.front(), 0.0};
  const auto* self_values = &m.grid_values_;
  (void)self_values;
  m.density_ = [dr, vals = m.grid_values_](double r) {
    if (r < 0.0) return 0.0;
    const double x = r / dr;
    const auto k = static_cast<std::size_t>(x);
    if (k + 1 >= vals.size()) return 0.0;
    const double w = x - static_cast<double>(k);
    return (1.0 - w) * vals[k] + w * vals[k + 1];
  };
  return m;
}

SubordinationMeasure::Repr SubordinationMeasure::repr() const {
  if (!density_) return Repr::Atoms;
  if (!atoms_.empty()) return Repr::Mixture;
  return grid_values_.empty() ? Repr::ClosedFormDensity : Repr::GridDensity;
}

double SubordinationMeasure::density(double r) const {
  if (!density_ || r <= 0.0) return 0.0;
  return std::max(density_(r), 0.0);
}

void SubordinationMeasure::build_cdf_table() {
  auto table = std::make_shared<std::vector<std::pair<double, double>>>();
  double r = kHeadCut;
  double cum = power_head(near_zero_, r);
  table->emplace_back(r, cum);
  const double step = std::sqrt(2.0);
  auto f = [this](double u) { return density(u); };
  while (r < kTableEnd) {
    const double next = r * step;
    cum += gauss_kronrod<double>(f, r, next, 1e-17, 1e-13, 400).value;
    r = next;
    table->emplace_back(r, cum);
  }
  cdf_table_ = std::move(table);
}

double SubordinationMeasure::ac_cdf(double u) const {
  if (!density_ || u <= 0.0) return 0.0;
  if (cdf_closed_) return cdf_closed_(u);
  if (!grid_values_.empty()) {
    const double x = u / grid_dr_;
    const auto k = static_cast<std::size_t>(x);
    if (k + 1 >= grid_values_.size()) return grid_cumulative_.back();
    const double w = x - static_cast<double>(k);
    const double fk = grid_values_[k];
    const double fu = (1.0 - w) * fk + w * grid_values_[k + 1];
    return grid_cumulative_[k] + 0.5 * (u - k * grid_dr_) * (fk + fu);
  }
  const auto& table = *cdf_table_;
  if (u <= table.front().first) return power_head(near_zero_, u);
  if (u >= table.back().first) {
    if (survival_closed_) return ac_mass_ - survival_closed_(u);
    auto f = [this](double v) { return density(v); };
    return table.back().second + panel_integral(f, table.back().first, u);
  }
  // Knots are geometric with ratio sqrt(2).
  const double pos = std::log(u / table.front().first) / std::log(std::sqrt(2.0));
  auto k = std::min(static_cast<std::size_t>(pos), table.size() - 2);
  while (k > 0 && table[k].first > u) --k;
  while (k + 1 < table.size() && table[k + 1].first <= u) ++k;
  auto f = [this](double v) { return density(v); };
  return table[k].second +
         gauss_kronrod<double>(f, table[k].first, u, 1e-17, 1e-13, 400).value;
}

double SubordinationMeasure::cdf(double u) const {
  double c = ac_cdf(u);
  for (const auto& [loc, mass] : atoms_) {
    if (loc < u) c += mass;
  }
  return c;
}

double SubordinationMeasure::mass_between(double lo, double hi) const {
  if (hi <= lo) return 0.0;
  double m = 0.0;
  for (const auto& [loc, mass] : atoms_) {
    if (loc >= lo && loc < hi) m += mass;
  }
  if (!density_) return m;
  if (lo <= 0.0) return m + ac_cdf(hi);
  if (!grid_values_.empty()) return m + ac_cdf(hi) - ac_cdf(lo);
  auto f = [this](double v) { return density(v); };
  return m + panel_integral(f, lo, hi);
}

double SubordinationMeasure::mass() const {
  double m = density_ ? ac_mass_ : 0.0;
  for (const auto& a : atoms_) m += a.second;
  return m;
}

double SubordinationMeasure::ac_survival(double u) const {
  if (!density_) return 0.0;
  if (u <= 0.0) return ac_mass_;
  if (survival_closed_) return survival_closed_(u);
  return std::max(ac_mass_ - ac_cdf(u), 0.0);
}

MeasureView SubordinationMeasure::view() const {
  MeasureView v;
  v.atoms = atoms_;
  if (density_) {
    auto self = std::make_shared<const SubordinationMeasure>(*this);
    v.density = [self](double r) { return self->density(r); };
    v.near_zero = near_zero_;
    v.tail = [self](double u) { return self->ac_survival(u); };
  }
  return v;
}

}  // namespace subord
