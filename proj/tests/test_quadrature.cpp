#include "orbit_averager/quadrature.hpp"

#include <doctest.h>

#include <cmath>

using namespace orbit_averager;

TEST_CASE("small rules match tabulated nodes") {
  const GaussLegendre<double> two(2);
  CHECK(two.nodes[1] == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-15));
  CHECK(two.weights[0] == doctest::Approx(1.0).epsilon(1e-15));
  const GaussLegendre<double> three(3);
  CHECK(three.nodes[1] == 0.0);
  CHECK(three.nodes[2] == doctest::Approx(std::sqrt(0.6)).epsilon(1e-15));
  CHECK(three.weights[1] == doctest::Approx(8.0 / 9.0).epsilon(1e-15));
  const GaussLegendre<double> one(1);
  CHECK(one.nodes[0] == 0.0);
  CHECK(one.weights[0] == doctest::Approx(2.0));
}

TEST_CASE("n-point rule integrates degree 2n-1 exactly") {
  for (int n : {4, 16, 64}) {
    const GaussLegendre<double> rule(n);
    CHECK(rule.weights.sum() == doctest::Approx(2.0).epsilon(1e-14));
    for (int deg = 0; deg <= 2 * n - 1; deg += 3) {
      const double exact = (deg % 2 == 0) ? 2.0 / (deg + 1) : 0.0;
      const double q = integrate([deg](double x) { return std::pow(x, deg); }, -1.0, 1.0, rule);
      CHECK(q == doctest::Approx(exact).epsilon(1e-13).scale(1.0));
    }
  }
}

TEST_CASE("composite rule on a smooth periodic integrand") {
  const GaussLegendre<double> rule(16);
  const double q = integrate([](double t) { return std::exp(std::sin(t)); }, 0.0, 2.0 * M_PI, rule, 8);
  // 2 pi I_0(1)
  CHECK(q == doctest::Approx(2.0 * M_PI * std::cyl_bessel_i(0.0, 1.0)).epsilon(1e-13));
}

TEST_CASE("rule rejects empty size") { CHECK_THROWS(GaussLegendre<double>(0)); }
