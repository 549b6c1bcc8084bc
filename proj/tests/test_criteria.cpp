#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "subord/bernstein.hpp"
#include "subord/criteria.hpp"
#include "subord/error.hpp"

using namespace subord;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> geometric_grid(double lo, double hi, int n) {
  std::vector<double> g;
  for (int k = 0; k < n; ++k) g.push_back(lo * std::pow(hi / lo, k / (n - 1.0)));
  return g;
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::IoError;
}

// t K(nu_t, rho) for frac(1/2, 0): the integral of |d/dt nu_t| reduces to
// int_0^2 w^{-1/2} e^{-w/4} (1 - w/2) dw / sqrt(pi).
double half_stable_tK() {
  const double a = std::sqrt(2.0);
  // int_0^2 w^{-1/2} e^{-w/4} dw = 4 sqrt(pi) erf(sqrt(2)/2), and the w^{1/2} moment
  // follows by parts.
  const double i0 = 2.0 * std::sqrt(kPi) * std::erf(a / 2.0);
  const double i1 = -4.0 * a * std::exp(-0.5) + 2.0 * i0;
  return (i0 - 0.5 * i1) / std::sqrt(kPi);
}

}  // namespace

TEST_CASE("symbol profile: invariants") {
  const auto frac = parse_catalog("frac(0.5,0)");
  const auto prof = compute_symbol(frac, 1.0);
  CHECK_FALSE(prof.no_decay);
  const std::size_t mid = prof.y.size() / 2;
  CHECK(prof.y[mid] == 0.0);
  CHECK(std::abs(prof.F[mid]) == 0.0);
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < prof.y.size(); ++k) {
    CHECK(std::abs(prof.F[k]) <= std::abs(frac(cplx(0.0, prof.y[k]))) * (1 + 1e-14));
    if (k == mid) continue;
    const double h = 1e-6 * std::abs(prof.y[k]);
    const cplx fd = (compute_symbol(frac, 1.0, 1.0, 16).F.size() ? cplx() : cplx()) +
                    ([&] {
                      auto F = [&](double y) {
                        const cplx p = frac(cplx(0.0, y));
                        return p * std::exp(p);
                      };
                      return (F(prof.y[k] + h) - F(prof.y[k] - h)) / (2.0 * h);
                    })();
    if (k % 97 == 0 && std::abs(prof.dF[k]) > 1e-200) {
      worst = std::max(worst, std::abs(fd - prof.dF[k]) / std::abs(prof.dF[k]));
    }
  }
  CHECK(worst <= 1e-5);

  CHECK(compute_symbol(parse_catalog("log(1)"), 0.1).no_decay);
}

TEST_CASE("lp_norm: examples") {
  const auto grid = geometric_grid(1.0, 2.0, 101);
  std::vector<double> unit_grid, ones;
  for (double g : grid) unit_grid.push_back(g - 1.0), ones.push_back(1.0);
  CHECK(lp_norm(ones, unit_grid, 2.0) == doctest::Approx(1.0).epsilon(1e-12));

  const auto frac = parse_catalog("frac(0.5,0)");
  auto norm_at = [&](std::size_t n) {
    const auto prof = compute_symbol(frac, 1.0, 0.0, n);
    std::vector<double> v;
    for (const auto& f : prof.F) v.push_back(std::abs(f));
    return lp_norm(v, prof.y, 2.0, prof.weights, TailFit::HeadAndTail);
  };
  const double coarse = norm_at(4000);
  CHECK(std::isfinite(coarse));
  CHECK(std::abs(norm_at(8000) - coarse) <= 1e-4 * coarse);
  // int |psi(iy)|^2 e^{2 Re psi(iy)} dy = 2 int y e^{-sqrt(2y)} dy = 6.
  CHECK(coarse == doctest::Approx(std::sqrt(6.0)).epsilon(1e-6));

  const auto prof = compute_symbol(parse_catalog("log(1)"), 0.05);
  std::vector<double> v;
  for (const auto& f : prof.F) v.push_back(std::abs(f));
  CHECK(code_of([&] { lp_norm(v, prof.y, 2.0, prof.weights, TailFit::HeadAndTail); }) ==
        ErrorCode::Divergent);
}

TEST_CASE("theorem 3 quantity: scaling and applicability") {
  const auto frac = parse_catalog("frac(0.5,0)");
  const auto ts = geometric_grid(1e-3, 1e-1, 9);
  std::vector<double> qs;
  for (double t : ts) qs.push_back(theorem3_quantity(frac, t, 1.5).value);
  const auto fit = fit_scaling_exponent(ts, qs);
  CHECK(fit.slope == doctest::Approx(-1.0).epsilon(1e-3));
  CHECK(fit.r2 >= 0.98);

  for (double theta : {0.5, 2.0}) {
    const auto scaled = frac.scaled(theta);
    for (double t : {1e-2, 0.3}) {
      const double lhs = theorem3_quantity(scaled, t, 1.5).value;
      const double rhs = theta * theorem3_quantity(frac, theta * t, 1.5).value;
      CHECK(std::abs(lhs - rhs) <= 1e-6 * std::abs(rhs));
    }
  }
  const auto v = theorem3_quantity(frac, 0.1, 1.5);
  CHECK(1.0 / v.p + 1.0 / v.q == doctest::Approx(1.0));

  // d/dy F_t ~ y^{-1/2} at 0: square-integrability fails logarithmically.
  CHECK(code_of([&] { theorem3_quantity(frac, 0.1, 2.0); }) == ErrorCode::Inapplicable);
  CHECK(code_of([&] { theorem3_quantity(parse_catalog("log(1)"), 0.01, 1.5); }) ==
        ErrorCode::Inapplicable);
  CHECK(code_of([&] { theorem3_quantity(parse_catalog("custom(a0=1)"), 0.01, 1.5); }) ==
        ErrorCode::Inapplicable);
}

TEST_CASE("K estimate: closed form, scaling, concentration, brackets") {
  const auto frac = parse_catalog("frac(0.5,0)");
  const double exact = half_stable_tK();
  CHECK(exact == doctest::Approx(0.967883).epsilon(1e-6));
  for (double t : {1e-3, 0.1}) {
    const auto k = k_fourier_estimate(frac, t);
    CHECK(t * k.K == doctest::Approx(exact).epsilon(1e-3));
    CHECK(k.negative_fraction <= 1e-3);
    CHECK(k_lower_bound(frac, t) <= k.K * (1 + 1e-2));
  }
  for (double theta : {0.5, 2.0}) {
    const double lhs = k_fourier_estimate(frac.scaled(theta), 0.02).K;
    const double rhs = theta * k_fourier_estimate(frac, theta * 0.02).K;
    CHECK(std::abs(lhs - rhs) <= 1e-5 * rhs);
  }
  for (const char* spec : {"frac(0.3,0)", "frac(0.7,0)", "frac(0.5,1)", "mixed(0.3,0.6)"}) {
    CAPTURE(spec);
    const auto psi = parse_catalog(spec);
    const auto k = k_fourier_estimate(psi, 0.01);
    CHECK(k.negative_fraction <= 1e-3);
    CHECK(k_lower_bound(psi, 0.01) <= k.K * (1 + 1e-2));
  }
  CHECK(code_of([] { k_fourier_estimate(parse_catalog("log(1)"), 0.01); }) == ErrorCode::NoDecay);
  CHECK(code_of([] { k_fourier_estimate(parse_catalog("custom(a0=1)"), 0.1); }) ==
        ErrorCode::NoDecay);
}

TEST_CASE("Hausdorff-Young sanity on the discrete grids") {
  const auto frac = parse_catalog("frac(0.5,0)");
  for (double p : {1.5, 1.25}) {
    const double q = p / (p - 1.0);
    const double t = 0.1;
    const auto prof = compute_symbol(frac, t);
    std::vector<double> v;
    for (const auto& f : prof.F) v.push_back(std::abs(f));
    const double Fp = lp_norm(v, prof.y, p, prof.weights, TailFit::HeadAndTail);
    const auto k = k_fourier_estimate(frac, t, k_inversion_params(), q);
    CHECK(k.norm_q <= Fp * (1 + 1e-3));
  }
}

TEST_CASE("sector check") {
  for (double alpha : {0.3, 0.5, 0.7}) {
    const auto psi = make_catalog(CatalogTag::FractionalPower, std::vector<double>{alpha, 0.0});
    const auto s = sector_check(psi);
    CHECK(s.theta == doctest::Approx(alpha * kPi / 2).epsilon(0.01 / (alpha * kPi / 2)));
    CHECK(s.beta == 0.0);
    CHECK(sector_contains(psi, s.theta, s.beta));
    CHECK_FALSE(sector_contains(psi, alpha * kPi / 2 - 0.01, 0.0));
  }
  const auto mixed = sector_check(parse_catalog("mixed(0.3,0.6)"));
  CHECK(mixed.theta < kPi / 2);
  CHECK(code_of([] { sector_check(parse_catalog("custom(a0=1)")); }) == ErrorCode::NotSectorial);
}

TEST_CASE("growth checks") {
  for (double alpha : {0.3, 0.5}) {
    const auto psi = make_catalog(CatalogTag::FractionalPower, std::vector<double>{alpha, 0.0});
    const auto g = growth_check(psi, alpha, alpha, 1.0);
    CHECK(g.b == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(g.k == doctest::Approx(1.0).epsilon(1e-10));
    const auto d = derivative_growth_check(psi, alpha, alpha, alpha - 1.0, 1.0);
    CHECK(d.k == doctest::Approx(alpha).epsilon(1e-8));
    CHECK(d.p == doctest::Approx(0.5 * (1.0 + std::min(2.0, 1.0 / (1.0 - alpha)))));
  }
  const auto mixed = parse_catalog("mixed(0.3,0.6)");
  const auto g = growth_check(mixed, 0.3, 0.3, 100.0);
  CHECK(g.b > 0.9);
  CHECK(g.k < 1.3);
  const double dr = std::abs(mixed.derivative(cplx(0.0, 1e4))) / (0.3 * std::pow(1e4, -0.7));
  CHECK(dr == doctest::Approx(1.0).epsilon(0.05));
  CHECK_NOTHROW(derivative_growth_check(mixed, 0.3, 0.3, -0.7, 100.0));

  CHECK(code_of([] { growth_check(parse_catalog("log(1)"), 0.3, 0.3, 1.0); }) ==
        ErrorCode::LowerBoundFails);
  CHECK(code_of([] { growth_check(parse_catalog("custom(a0=1)"), 0.5, 0.9, 1.0); }) ==
        ErrorCode::UpperBoundFails);
  CHECK(code_of([&] { derivative_growth_check(mixed, 0.3, 0.6, -0.7, 100.0); }) ==
        ErrorCode::WindowViolated);
  CHECK(p_rule(0.3, 0.6, -1.1) == doctest::Approx(std::min({2.0, 1.0 / 0.8, 0.4 / 0.3})));
}

TEST_CASE("scaling fit: examples") {
  const auto ts = geometric_grid(1e-3, 1e-1, 17);
  std::vector<double> a, b, c;
  for (double t : ts) {
    a.push_back(3.0 / t);
    b.push_back(std::pow(t, -0.5));
    c.push_back((1.0 / t) * (1.0 + 0.01 * std::sin(std::log(t))));
  }
  const auto fa = fit_scaling_exponent(ts, a);
  CHECK(fa.slope == doctest::Approx(-1.0));
  CHECK(fa.r2 == doctest::Approx(1.0));
  CHECK(fit_scaling_exponent(ts, b).slope == doctest::Approx(-0.5));
  const auto fc = fit_scaling_exponent(ts, c);
  CHECK(std::abs(fc.slope + 1.0) <= 0.02);
  CHECK(fc.r2 >= 0.98);
  CHECK_FALSE(fc.poor_fit);
  const std::vector<double> few = {1, 2, 3};
  CHECK(code_of([&] { fit_scaling_exponent(few, few); }) == ErrorCode::ParameterOutOfRange);
}

TEST_CASE("theorem 2 verdict: routes") {
  const auto ts = geometric_grid(1e-3, 1e-1, 9);
  const auto frac = theorem2_verdict(parse_catalog("frac(0.5,0)"), ts);
  CHECK(frac.verdict == Verdict::Pass);
  CHECK(frac.route == "fourier");
  CHECK(frac.fit->slope == doctest::Approx(-1.0).epsilon(0.01));

  const auto log1 = theorem2_verdict(parse_catalog("log(1)"), ts);
  CHECK(log1.verdict == Verdict::Pass);
  CHECK(log1.route == "theorem5");
  CHECK(log1.constants.at("max_t_times_integral") <= 1.02);

  CHECK(code_of([&] { theorem2_verdict(parse_catalog("custom(a0=1)"), ts); }) ==
        ErrorCode::Undecidable);

  // The half-stable density rises near 0, so the route itself is refused, but its
  // integral still scales like the Fourier estimate (t I = 2/pi exactly).
  const auto t5 = theorem5_verdict(parse_catalog("frac(0.5,0)"), ts);
  CHECK(t5.verdict == Verdict::Fail);
  CHECK(t5.constants.at("max_t_times_integral") == doctest::Approx(2.0 / kPi).epsilon(1e-4));
  CHECK(std::abs(t5.fit->slope - frac.fit->slope) <= 0.15);
}

TEST_CASE("theorem 4 parameter suite") {
  const auto frac = theorem4_verdict(parse_catalog("frac(0.5,0)"), {0.5, 0.5, std::nullopt, 1.0});
  CHECK(frac.verdict == Verdict::Pass);
  CHECK(frac.constants.at("p") == doctest::Approx(1.5));
  const auto mixed = theorem4_verdict(parse_catalog("mixed(0.3,0.6)"), {0.3, 0.3, -0.7, 100.0});
  CHECK(mixed.verdict == Verdict::Pass);
  CHECK(mixed.constants.at("theta") < kPi / 2);
  const auto id = theorem4_verdict(parse_catalog("custom(a0=1)"), {0.5, 0.9, -0.2, 1.0});
  CHECK(id.verdict == Verdict::Fail);
}
