#include "subord/bernstein.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/special_functions/expint.hpp>

#include "subord/error.hpp"
#include "subord/special.hpp"

namespace subord {

namespace {

constexpr double kPi = std::numbers::pi;

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::ParameterOutOfRange, what);
}

void validate(const Catalog& kind) {
  std::visit(
      [](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, FractionalPower>) {
          require(k.alpha > 0.0 && k.alpha < 1.0, "frac: alpha must lie in (0,1)");
          require(k.c >= 0.0 && std::isfinite(k.c), "frac: c must be >= 0");
        } else if constexpr (std::is_same_v<K, LogShift>) {
          require(k.b > 0.0 && std::isfinite(k.b), "log: b must be > 0");
        } else if constexpr (std::is_same_v<K, AcoshShift>) {
          require(k.b >= 1.0 && std::isfinite(k.b), "acosh: b must be >= 1");
        } else if constexpr (std::is_same_v<K, MixedExample2>) {
          require(k.alpha > 0.0 && k.alpha < k.beta && k.beta < 1.0,
                  "mixed: need 0 < alpha < beta < 1");
        } else {
          require(k.atom >= 0.0 && std::isfinite(k.atom), "custom: a0 must be >= 0");
          for (const auto& t : k.terms) {
            require(t.weight > 0.0, "custom: weights must be > 0");
            require(t.power < 1.0, "custom: power must be < 1 for integrability at 0");
            require(t.rate >= 0.0, "custom: rate must be >= 0");
            require(t.rate > 0.0 || t.power > 0.0,
                    "custom: rate 0 needs power > 0 for integrability at infinity");
          }
        }
      },
      kind);
}

// Tail of u^{-1} e^{-u} I_0(u) beyond U, exact enough for the driver.
double acosh_unit_tail(double U) {
  constexpr double kSwitch = 40.0;
  double head = 0.0;
  if (U < kSwitch) {
    head = gauss_kronrod<double>(
               [](double u) { return special::bessel_i_scaled(0.0, u) / u; }, U, kSwitch, 1e-17,
               1e-14, 400)
               .value;
    U = kSwitch;
  }
  // e^{-u} I_0(u) = (2 pi u)^{-1/2} (1 + 1/(8u) + 9/(128u^2) + 225/(3072u^3) + ...)
  static constexpr double kCoef[] = {1.0, 1.0 / 8.0, 9.0 / 128.0, 225.0 / 3072.0,
                                     11025.0 / 98304.0};
  double sum = 0.0;
  for (int k = 0; k < 5; ++k) {
    const double e = 0.5 + k;
    sum += kCoef[k] * std::pow(U, -e) / e;
  }
  return head + sum / std::sqrt(2.0 * kPi);
}

LevyMeasure base_measure(const Catalog& kind) {
  LevyMeasure m;
  std::visit(
      [&m](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, FractionalPower>) {
          const double a = k.alpha;
          const double c = k.c;
          const double norm = a / std::tgamma(1.0 - a);
          m.density = [a, c, norm](double u) { return norm * std::pow(u, -a) * std::exp(-c * u); };
          m.near_zero = {norm, -a};
          if (c == 0.0) {
            m.inverse_moment_tail = [a](double U) {
              return std::pow(U, -a) / std::tgamma(1.0 - a);
            };
          } else {
            // alpha/Gamma(1-a) * c^a * Gamma(-a, cU), via Gamma(-a,x) = (x^{-a}e^{-x} - Gamma(1-a,x))/a
            m.inverse_moment_tail = [a, c](double U) {
              const double x = c * U;
              const double upper = std::tgamma(1.0 - a) * special::gamma_q(1.0 - a, x);
              return std::pow(c, a) * (std::pow(x, -a) * std::exp(-x) - upper) /
                     std::tgamma(1.0 - a);
            };
          }
        } else if constexpr (std::is_same_v<K, LogShift>) {
          const double b = k.b;
          m.density = [b](double u) { return std::exp(-b * u); };
          m.near_zero = {1.0, 0.0};
          m.inverse_moment_tail = [b](double U) { return boost::math::expint(1, b * U); };
        } else if constexpr (std::is_same_v<K, AcoshShift>) {
          const double tilt = k.b - 1.0;
          m.density = [tilt](double u) {
            return std::exp(-tilt * u) * special::bessel_i_scaled(0.0, u);
          };
          m.near_zero = {1.0, 0.0};
          if (tilt == 0.0) {
            m.inverse_moment_tail = acosh_unit_tail;
          } else {
            m.inverse_moment_tail = [d = m.density](double U) {
              return dyadic_tail([&d](double u) { return d(u) / u; }, U);
            };
          }
        } else if constexpr (std::is_same_v<K, MixedExample2>) {
          const double a = k.alpha;
          const double be = k.beta;
          const double norm = a / std::tgamma(1.0 - a);
          m.density = [a, be, norm](double u) {
            return norm * std::pow(u, -a) + u * special::stable_density(be, u);
          };
          m.near_zero = {norm, -a};
          m.inverse_moment_tail = [a, be](double U) {
            return std::pow(U, -a) / std::tgamma(1.0 - a) + special::stable_survival(be, U);
          };
        } else {
          m.atom_at_zero = k.atom;
          if (k.terms.empty()) return;
          auto terms = k.terms;
          m.density = [terms](double u) {
            double s = 0.0;
            for (const auto& t : terms) s += t.weight * std::pow(u, -t.power) * std::exp(-t.rate * u);
            return s;
          };
          double lead = -1e300;
          for (const auto& t : terms) lead = std::max(lead, t.power);
          double coef = 0.0;
          for (const auto& t : terms) {
            if (t.power == lead) coef += t.weight;
          }
          m.near_zero = {coef, -lead};
          m.inverse_moment_tail = [terms](double U) {
            double s = 0.0;
            for (const auto& t : terms) {
              if (t.rate == 0.0) {
                s += t.weight * std::pow(U, -t.power) / t.power;
              } else {
                s += dyadic_tail(
                    [&t](double u) {
                      return t.weight * std::pow(u, -t.power - 1.0) * std::exp(-t.rate * u);
                    },
                    U);
              }
            }
            return s;
          };
        }
      },
      kind);
  return m;
}

LevyMeasure scale_measure(LevyMeasure m, double theta) {
  if (theta == 1.0) return m;
  m.atom_at_zero *= theta;
  m.near_zero.coef *= theta;
  if (m.density) m.density = [d = m.density, theta](double u) { return theta * d(u); };
  if (m.inverse_moment_tail) {
    m.inverse_moment_tail = [f = m.inverse_moment_tail, theta](double U) { return theta * f(U); };
  }
  return m;
}

cplx closed_psi(const Catalog& kind, cplx z) {
  return std::visit(
      [z](const auto& k) -> cplx {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, FractionalPower>) {
          return std::pow(k.c, k.alpha) - std::pow(cplx(k.c) - z, k.alpha);
        } else if constexpr (std::is_same_v<K, LogShift>) {
          return std::log(k.b) - std::log(cplx(k.b) - z);
        } else if constexpr (std::is_same_v<K, AcoshShift>) {
          return std::acosh(cplx(k.b)) - std::acosh(cplx(k.b) - z);
        } else if constexpr (std::is_same_v<K, MixedExample2>) {
          if (z == cplx(0.0)) return 0.0;
          return -std::pow(-z, k.alpha) + (std::exp(-std::pow(-z, k.beta)) - 1.0);
        } else {
          // Termwise: int (e^{zu}-1) u^{-a-1} e^{-bu} du = Gamma(-a)((b-z)^a - b^a), a != 0.
          cplx sum = k.atom * z;
          for (const auto& t : k.terms) {
            const cplx w = cplx(t.rate) - z;
            if (t.power == 0.0) {
              sum += t.weight * (std::log(t.rate) - std::log(w));
            } else {
              const double base = t.rate == 0.0 ? 0.0 : std::pow(t.rate, t.power);
              sum += t.weight * std::tgamma(-t.power) * (std::pow(w, t.power) - base);
            }
          }
          return sum;
        }
      },
      kind);
}

cplx closed_derivative(const Catalog& kind, cplx z) {
  return std::visit(
      [z](const auto& k) -> cplx {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, FractionalPower>) {
          const cplx w = cplx(k.c) - z;
          if (w == cplx(0.0)) throw Error(ErrorCode::NonDifferentiable, "frac: psi' singular at c");
          return k.alpha * std::pow(w, k.alpha - 1.0);
        } else if constexpr (std::is_same_v<K, LogShift>) {
          return 1.0 / (cplx(k.b) - z);
        } else if constexpr (std::is_same_v<K, AcoshShift>) {
          const cplx w = cplx(k.b) - z;
          const cplx d = std::sqrt(w - 1.0) * std::sqrt(w + 1.0);
          if (d == cplx(0.0)) throw Error(ErrorCode::NonDifferentiable, "acosh: psi' singular");
          return 1.0 / d;
        } else if constexpr (std::is_same_v<K, MixedExample2>) {
          if (z == cplx(0.0)) throw Error(ErrorCode::NonDifferentiable, "mixed: psi' singular at 0");
          const cplx mz = -z;
          return k.alpha * std::pow(mz, k.alpha - 1.0) +
                 k.beta * std::pow(mz, k.beta - 1.0) * std::exp(-std::pow(mz, k.beta));
        } else {
          throw Error(ErrorCode::NoClosedForm, "custom psi has no closed form");
        }
      },
      kind);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_number(std::string_view s) {
  s = trim(s);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw Error(ErrorCode::ConfigParseError, "bad number '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

}  // namespace

BernsteinFunction::BernsteinFunction(Catalog kind, double scale)
    : kind_(std::move(kind)), scale_(scale) {
  require(scale > 0.0 && std::isfinite(scale), "scale must be > 0");
  validate(kind_);
  levy_ = std::make_shared<const LevyMeasure>(scale_measure(base_measure(kind_), scale_));
}

CatalogTag BernsteinFunction::tag() const { return static_cast<CatalogTag>(kind_.index()); }

BernsteinFunction BernsteinFunction::scaled(double theta) const {
  return BernsteinFunction(kind_, scale_ * theta);
}

std::string BernsteinFunction::spec() const {
  std::string body = std::visit(
      [](const auto& k) -> std::string {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, FractionalPower>) {
          return "frac(" + fmt(k.alpha) + "," + fmt(k.c) + ")";
        } else if constexpr (std::is_same_v<K, LogShift>) {
          return "log(" + fmt(k.b) + ")";
        } else if constexpr (std::is_same_v<K, AcoshShift>) {
          return "acosh(" + fmt(k.b) + ")";
        } else if constexpr (std::is_same_v<K, MixedExample2>) {
          return "mixed(" + fmt(k.alpha) + "," + fmt(k.beta) + ")";
        } else {
          std::string s = "custom(a0=" + fmt(k.atom);
          for (const auto& t : k.terms) {
            s += "; " + fmt(t.weight) + ":" + fmt(t.power) + ":" + fmt(t.rate);
          }
          return s + ")";
        }
      },
      kind_);
  return scale_ == 1.0 ? body : fmt(scale_) + "*" + body;
}

bool BernsteinFunction::has_closed_form() const { return tag() != CatalogTag::CustomLevy; }

cplx BernsteinFunction::operator()(cplx z) const {
  if (z.real() > 0.0) throw Error(ErrorCode::DomainError, "psi needs Re z <= 0");
  if (z == cplx(0.0)) return 0.0;
  return scale_ * closed_psi(kind_, z);
}

cplx BernsteinFunction::derivative(cplx z) const {
  if (z.real() > 0.0) throw Error(ErrorCode::DomainError, "psi' needs Re z <= 0");
  if (has_closed_form()) return scale_ * closed_derivative(kind_, z);
  const auto& custom = std::get<CustomLevy>(kind_);
  if (custom.terms.empty()) return scale_ * custom.atom;
  // Central differences along the imaginary direction, Richardson-checked.
  const cplx ih(0.0, 1.0);
  double h = 0.05 * std::max(1.0, std::abs(z));
  auto diff = [&](double step) {
    return ((*this)(z + ih * step) - (*this)(z - ih * step)) / (2.0 * ih * step);
  };
  cplx coarse = diff(h);
  for (int level = 0; level < 10; ++level) {
    h *= 0.5;
    const cplx fine = diff(h);
    const cplx rich = (4.0 * fine - coarse) / 3.0;
    if (std::abs(fine - coarse) <= 1e-6 * std::max(1e-12, std::abs(rich))) return rich;
    coarse = fine;
  }
  throw Error(ErrorCode::NonDifferentiable, "Richardson estimates of psi' disagree");
}

BernsteinFunction make_catalog(CatalogTag tag, std::span<const double> p) {
  auto need = [&p](std::size_t lo, std::size_t hi) {
    if (p.size() < lo || p.size() > hi) {
      throw Error(ErrorCode::ParameterOutOfRange, "wrong number of catalog parameters");
    }
  };
  switch (tag) {
    case CatalogTag::FractionalPower:
      need(1, 2);
      return BernsteinFunction(FractionalPower{p[0], p.size() > 1 ? p[1] : 0.0});
    case CatalogTag::LogShift:
      need(1, 1);
      return BernsteinFunction(LogShift{p[0]});
    case CatalogTag::AcoshShift:
      need(1, 1);
      return BernsteinFunction(AcoshShift{p[0]});
    case CatalogTag::MixedExample2:
      need(2, 2);
      return BernsteinFunction(MixedExample2{p[0], p[1]});
    case CatalogTag::CustomLevy: {
      if (p.empty() || (p.size() - 1) % 3 != 0) {
        throw Error(ErrorCode::ParameterOutOfRange, "custom: a0 followed by (w,a,b) triples");
      }
      CustomLevy c;
      c.atom = p[0];
      for (std::size_t i = 1; i < p.size(); i += 3) c.terms.push_back({p[i], p[i + 1], p[i + 2]});
      return BernsteinFunction(std::move(c));
    }
  }
  throw Error(ErrorCode::ParameterOutOfRange, "unknown catalog tag");
}

BernsteinFunction parse_catalog(std::string_view text) {
  text = trim(text);
  double theta = 1.0;
  if (const auto star = text.find('*'); star != std::string_view::npos) {
    theta = parse_number(text.substr(0, star));
    text = trim(text.substr(star + 1));
  }
  const auto open = text.find('(');
  if (open == std::string_view::npos || text.back() != ')') {
    throw Error(ErrorCode::ConfigParseError, "expected name(args) in '" + std::string(text) + "'");
  }
  const auto name = trim(text.substr(0, open));
  const auto args = text.substr(open + 1, text.size() - open - 2);
  auto numbers = [&args] {
    std::vector<double> v;
    for (auto part : split(args, ',')) v.push_back(parse_number(part));
    return v;
  };
  BernsteinFunction base = [&]() -> BernsteinFunction {
    if (name == "frac") return make_catalog(CatalogTag::FractionalPower, numbers());
    if (name == "log") return make_catalog(CatalogTag::LogShift, numbers());
    if (name == "acosh") return make_catalog(CatalogTag::AcoshShift, numbers());
    if (name == "mixed") return make_catalog(CatalogTag::MixedExample2, numbers());
    if (name == "custom") {
      CustomLevy c;
      for (auto part : split(args, ';')) {
        if (part.empty()) continue;
        if (part.substr(0, 3) == "a0=") {
          c.atom = parse_number(part.substr(3));
          continue;
        }
        auto fields = split(part, ':');
        if (fields.size() != 3) {
          throw Error(ErrorCode::ConfigParseError, "custom term must be w:a:b");
        }
        c.terms.push_back(
            {parse_number(fields[0]), parse_number(fields[1]), parse_number(fields[2])});
      }
      return BernsteinFunction(std::move(c));
    }
    throw Error(ErrorCode::ConfigParseError, "unknown catalog name '" + std::string(name) + "'");
  }();
  return theta == 1.0 ? base : base.scaled(theta);
}

cplx eval_psi(const BernsteinFunction& psi, cplx z) { return psi(z); }

cplx eval_psi_derivative(const BernsteinFunction& psi, double y) {
  return psi.derivative(cplx(0.0, y));
}

double levy_density(const BernsteinFunction& psi, double u) {
  const auto& rho = psi.levy();
  if (!rho.has_density() || u <= 0.0) return 0.0;
  return std::max(rho.density(u), 0.0);
}

cplx psi_by_quadrature(const LevyMeasure& rho, cplx z, const QuadratureSpec& spec) {
  if (z.real() > 0.0) throw Error(ErrorCode::DomainError, "psi needs Re z <= 0");
  // The head (0, eps] is first order in |z| eps.
  QuadratureSpec local = spec;
  local.epsilon = std::min(spec.epsilon, 1e-8 / std::max(1.0, std::abs(z)));
  Integrand g;
  g.dim = 1;
  g.value = [z](double u) {
    Vec v(1);
    // Series near 0.
    const cplx zu = z * u;
    v(0) = std::abs(zu) < 1e-5 ? z * (1.0 + 0.5 * zu + zu * zu / 6.0)
                               : (std::exp(zu) - 1.0) / u;
    return v;
  };
  g.at_zero = Vec::Constant(1, z);
  g.zero_exponent = 0.0;
  g.at_infinity = Vec::Constant(1, -1.0);
  const double re = z.real();
  g.tail_deviation = [re](double U) { return std::exp(re * U); };
  return integrate_measure(g, rho.view(), local).value(0);
}

TruncatedSector::TruncatedSector(double theta_, double beta_) : theta(theta_), beta(beta_) {
  require(theta > 0.0 && theta < kPi / 2.0, "sector angle must lie in (0, pi/2)");
  require(beta >= 0.0, "sector shift must be >= 0");
}

bool TruncatedSector::contains(cplx w) const {
  if (!(w.real() < 0.0)) return false;
  return std::abs(std::arg(cplx(beta) - w)) < theta;
}

}  // namespace subord
