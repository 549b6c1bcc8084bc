#include <doctest.h>

#include <cmath>
#include <vector>

#include "subord/bernstein.hpp"
#include "subord/error.hpp"

using namespace subord;

namespace {

std::vector<BernsteinFunction> catalog() {
  return {parse_catalog("frac(0.5,0)"), parse_catalog("frac(0.3,2)"), parse_catalog("log(1)"),
          parse_catalog("log(3)"),      parse_catalog("acosh(1)"),    parse_catalog("acosh(2)"),
          parse_catalog("mixed(0.3,0.6)")};
}

}  // namespace

TEST_CASE("catalog closed forms") {
  const double alpha_half[] = {0.5, 0.0};
  auto frac = make_catalog(CatalogTag::FractionalPower, alpha_half);
  CHECK(frac(cplx(-4.0)).real() == doctest::Approx(-2.0));
  CHECK(std::abs(parse_catalog("log(1)")(0.0)) == 0.0);
  CHECK(parse_catalog("log(1)")(-1.0).real() == doctest::Approx(-std::log(2.0)));
  CHECK(parse_catalog("acosh(1)")(-1.0).real() == doctest::Approx(-std::acosh(2.0)));
  const double bad[] = {1.5, 0.0};
  CHECK_THROWS_AS(make_catalog(CatalogTag::FractionalPower, bad), Error);
  CHECK_THROWS_AS(parse_catalog("mixed(0.6,0.3)"), Error);
  CHECK_THROWS_AS(parse_catalog("log(1)")(cplx(0.1, 0.0)), Error);
}

TEST_CASE("derivatives") {
  CHECK(eval_psi_derivative(parse_catalog("log(1)"), 0.0).real() == doctest::Approx(1.0));
  const cplx d = eval_psi_derivative(parse_catalog("frac(0.5,0)"), 1.0);
  CHECK(d.real() == doctest::Approx(0.5 * std::cos(M_PI / 4)));
  CHECK(d.imag() == doctest::Approx(0.5 * std::sin(M_PI / 4)));
  CHECK(parse_catalog("acosh(1)").derivative(-1.0).real() == doctest::Approx(1.0 / std::sqrt(3.0)));

  // closed forms against central differences along the imaginary axis
  for (const auto& psi : catalog()) {
    for (double y : {-30.0, -1.0, 0.2, 4.0}) {
      const double h = 1e-5 * std::max(1.0, std::abs(y));
      const cplx fd = (psi(cplx(0, y + h)) - psi(cplx(0, y - h))) / cplx(0, 2 * h);
      CHECK(std::abs(fd - eval_psi_derivative(psi, y)) <= 1e-6 * (1 + std::abs(fd)));
    }
  }
}

TEST_CASE("levy densities") {
  CHECK(levy_density(parse_catalog("log(1)"), 1e-12) == doctest::Approx(1.0));
  CHECK(levy_density(parse_catalog("acosh(1)"), 1e-12) == doctest::Approx(1.0));
  CHECK(levy_density(parse_catalog("frac(0.5,0)"), 1.0) == doctest::Approx(0.28209479177387814));
  auto c = parse_catalog("frac(0.5,0)").levy().certificates();
  CHECK(c.mass_unit_interval == doctest::Approx(2.0 * 0.28209479177387814).epsilon(1e-8));
  CHECK(c.inverse_moment_tail == doctest::Approx(1.0 / std::sqrt(M_PI)));
}

TEST_CASE("T_0 invariants on the real axis and the imaginary axis") {
  for (const auto& psi : catalog()) {
    CAPTURE(psi.spec());
    CHECK(std::abs(psi(0.0)) == 0.0);
    for (double h : {1e-2, 1e-3}) {
      std::vector<double> v;
      for (double s = -20.0; s <= -1e-3; s += h) v.push_back(psi(s).real());
      for (double x : v) CHECK(x <= 0.0);
      for (int order = 1; order <= 3; ++order) {
        for (std::size_t i = 0; i + 1 < v.size(); ++i) v[i] = v[i + 1] - v[i];
        v.pop_back();
        const double floor = order < 3 ? -1e-8 : -1e-6;
        double worst = 0.0;
        for (double x : v) worst = std::min(worst, x);
        CHECK(worst >= floor);
      }
    }
    for (double y = 1e-3; y <= 1e6; y *= 1.7) {
      CHECK(std::abs(std::exp(psi(cplx(0, y)))) <= 1.0 + 1e-10);
      CHECK(psi(cplx(-0.3 * y, y)).real() <= 1e-12);
    }
    // |psi(iy)| ~ |y|^alpha near 0, so alpha = 0.3 needs |y| ~ 1e-30 to reach 1e-8.
    CHECK(std::abs(psi(cplx(0, 1e-30))) <= 1e-8);
    CHECK(std::abs(psi(cplx(0, -1e-30))) <= 1e-8);
  }
}

TEST_CASE("scaling and specs round-trip") {
  auto psi = parse_catalog("2*log(1)");
  CHECK(psi.scale() == 2.0);
  CHECK(psi(-1.0).real() == doctest::Approx(-2.0 * std::log(2.0)));
  CHECK(levy_density(psi, 1.0) == doctest::Approx(2.0 * std::exp(-1.0)));
  for (const char* s : {"frac(0.5,0)", "2*log(1)", "acosh(1)", "mixed(0.3,0.6)",
                        "custom(a0=1; 0.5:0.2:1)"}) {
    CHECK(parse_catalog(s).spec() == s);
  }
}

TEST_CASE("custom measures evaluate by quadrature") {
  auto identity = parse_catalog("custom(a0=1)");
  CHECK(!identity.has_closed_form());
  CHECK(identity(cplx(-2.0, 3.0)) == cplx(-2.0, 3.0));
  CHECK(identity.derivative(cplx(0.0, 5.0)) == cplx(1.0));

  // w u^0 e^{-u} is log(1); w u^{0.5} e^{-2u} is Gamma(-0.5)((2-z)^{0.5} - 2^{0.5})
  auto custom = parse_catalog("custom(a0=0.5; 1:0:1; 2:0.5:2)");
  const auto reference = [](cplx z) {
    return 0.5 * z - std::log(1.0 - z) + 2.0 * std::tgamma(-0.5) * (std::sqrt(2.0 - z) - std::sqrt(2.0));
  };
  for (cplx z : {cplx(-1.0), cplx(-0.1, 2.0), cplx(0.0, 7.0), cplx(0.0, -300.0)}) {
    CHECK(std::abs(custom(z) - reference(z)) <= 1e-12 * (1 + std::abs(reference(z))));
    const cplx quad = psi_by_quadrature(custom.levy(), z, QuadratureSpec{});
    CHECK(std::abs(custom(z) - quad) <= 1e-8 * (1 + std::abs(quad)));
  }
  // rate 0 and negative powers
  auto heavy = parse_catalog("custom(a0=0; 2:0.4:0; 1:-0.5:3)");
  for (cplx z : {cplx(-2.0), cplx(-0.5, 1.0)}) {
    const cplx quad = psi_by_quadrature(heavy.levy(), z, QuadratureSpec{.tail_cap = 1e12, .tol_abs = 1e-9, .tol_rel = 1e-9});
    CHECK(std::abs(heavy(z) - quad) <= 1e-6 * (1 + std::abs(quad)));
  }
  const cplx dref = 0.5 + 1.0 / (1.0 - cplx(0, 2)) - std::tgamma(-0.5) / std::sqrt(2.0 - cplx(0, 2));
  CHECK(std::abs(eval_psi_derivative(custom, 2.0) - dref) <= 1e-5 * std::abs(dref));
}

TEST_CASE("truncated sector membership") {
  TruncatedSector s(M_PI / 4, 1.0);
  CHECK(s.contains(cplx(-1.0, 0.0)));
  CHECK(s.contains(cplx(-1.0, 1.5)));
  CHECK(!s.contains(cplx(-1.0, 2.5)));
  CHECK(!s.contains(cplx(0.5, 0.0)));
  CHECK_THROWS_AS(TruncatedSector(2.0, 0.0), Error);
}
