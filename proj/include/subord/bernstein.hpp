#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "subord/levy_measure.hpp"
#include "subord/quadrature.hpp"

namespace subord {

// Catalog of negative Bernstein functions of class T_0 (psi(0) = 0).

/// c^alpha - (c - z)^alpha
struct FractionalPower {
  double alpha = 0.5;
  double c = 0.0;
};

/// log b - log(b - z)
struct LogShift {
  double b = 1.0;
};

/// acosh b - acosh(b - z)
struct AcoshShift {
  double b = 1.0;
};

/// -(-z)^alpha + (exp(-(-z)^beta) - 1), 0 < alpha < beta < 1
struct MixedExample2 {
  double alpha = 0.3;
  double beta = 0.6;
};

/// Drift a0 plus a Levy density sum_i w_i u^{-a_i} e^{-b_i u}.
struct CustomLevy {
  struct Term {
    double weight = 1.0;
    double power = 0.0;
    double rate = 1.0;
  };
  double atom = 0.0;
  std::vector<Term> terms;
};

using Catalog = std::variant<FractionalPower, LogShift, AcoshShift, MixedExample2, CustomLevy>;

enum class CatalogTag { FractionalPower, LogShift, AcoshShift, MixedExample2, CustomLevy };

/// A member of T_0 together with its Levy measure. Immutable; copies share
/// the measure. `scaled(theta)` gives theta * psi, whose measure is theta * rho.
class BernsteinFunction {
 public:
  explicit BernsteinFunction(Catalog kind, double scale = 1.0);

  const Catalog& kind() const { return kind_; }
  CatalogTag tag() const;
  double scale() const { return scale_; }
  BernsteinFunction scaled(double theta) const;

  /// Canonical spec string, e.g. "frac(0.5,0)" or "2*log(1)".
  std::string spec() const;

  const LevyMeasure& levy() const { return *levy_; }

  /// False for CustomLevy. Its psi is the representation integral taken term
  /// by term in closed form; psi_by_quadrature is the independent check.
  bool has_closed_form() const;

  /// psi(z) for Re z <= 0 (principal branches). Throws DomainError otherwise.
  cplx operator()(cplx z) const;

  /// psi'(z) for Re z <= 0. CustomLevy uses Richardson-checked central
  /// differences along the imaginary direction.
  cplx derivative(cplx z) const;


 private:
  Catalog kind_;
  double scale_ = 1.0;
  std::shared_ptr<const LevyMeasure> levy_;
};

BernsteinFunction make_catalog(CatalogTag tag, std::span<const double> params);

/// Parses "frac(alpha,c)", "log(b)", "acosh(b)", "mixed(alpha,beta)",
/// "custom(a0=<v>; w:a:b; ...)", optionally prefixed by "<theta>*".
BernsteinFunction parse_catalog(std::string_view text);

cplx eval_psi(const BernsteinFunction& psi, cplx z);
/// psi'(iy).
cplx eval_psi_derivative(const BernsteinFunction& psi, double y);
double levy_density(const BernsteinFunction& psi, double u);

/// psi(z) from the integral representation, independent of any closed form.
cplx psi_by_quadrature(const LevyMeasure& rho, cplx z, const QuadratureSpec& spec);

/// S(theta, beta) = (beta + {|arg(-z)| < theta}) intersected with Re z < 0.
struct TruncatedSector {
  double theta = 0.0;
  double beta = 0.0;

  TruncatedSector(double theta_, double beta_);
  bool contains(cplx w) const;
};

}  // namespace subord
