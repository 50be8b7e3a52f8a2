#include <doctest.h>

#include <cmath>
#include <numbers>

#include "boxctl/error.hpp"
#include "boxctl/quadrature.hpp"

using namespace boxctl;

TEST_CASE("128-point rule is exact for high-degree polynomials") {
  CHECK(quadrature::gauss_legendre_128([](double x) { return std::pow(x, 10); }, 0.0, 1.0) ==
        doctest::Approx(1.0 / 11.0).epsilon(1e-15));
  CHECK(quadrature::gauss_legendre_128([](double x) { return std::pow(x, 200); }, -1.0, 1.0) ==
        doctest::Approx(2.0 / 201.0).epsilon(1e-13));
}

TEST_CASE("composite and adaptive rules integrate oscillatory functions") {
  const double pi = std::numbers::pi;
  auto f = [](double x) { return std::sin(40.0 * x) * std::exp(x); };
  // int_0^pi e^x sin(40x) dx = 40 (1 - e^pi cos(40 pi)) / 1601.
  const double exact = 40.0 * (1.0 - std::exp(pi)) / 1601.0;
  CHECK(quadrature::composite_gauss_legendre(f, 0.0, pi, 8) == doctest::Approx(exact).epsilon(1e-13));
  CHECK(quadrature::adaptive(f, 0.0, pi, 1e-12) == doctest::Approx(exact).epsilon(1e-11));
}
