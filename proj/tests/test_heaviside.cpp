#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "shapeopt/grid.hpp"
#include "shapeopt/heaviside.hpp"

using namespace shapeopt;

TEST_CASE("sharp step convention") {
  CHECK(heaviside(0.0) == 0.0);
  CHECK(heaviside(-1e-300) == 0.0);
  CHECK(heaviside(1e-300) == 1.0);
  CHECK(heaviside(2.0) == 1.0);
}

TEST_CASE("smoothing width must be positive") {
  CHECK_THROWS_AS(Smoothing{0.0}, std::invalid_argument);
  CHECK_THROWS_AS(Smoothing{-1.0}, std::invalid_argument);
}

TEST_CASE("midpoint identities are exact for dyadic widths") {
  for (double eps : {1.0, 0.5, 0.25, 0.0078125}) {
    const Smoothing s{eps};
    CHECK(heaviside_eps(s, eps / 2.0) == 0.5);
    CHECK(heaviside_eps_prime(s, eps / 2.0) == 1.5 / eps);
    CHECK(heaviside_eps(s, 0.0) == 0.0);
    CHECK(heaviside_eps(s, eps) == 1.0);
    CHECK(heaviside_eps(s, -0.1 * eps) == 0.0);
    CHECK(heaviside_eps(s, 1.1 * eps) == 1.0);
    CHECK(heaviside_eps_prime(s, -0.1 * eps) == 0.0);
    CHECK(heaviside_eps_prime(s, 1.1 * eps) == 0.0);
  }
}

TEST_CASE("interior cubic matches an independent evaluation") {
  std::mt19937_64 rng(3);
  const double eps = 0.37;
  const Smoothing s{eps};
  std::uniform_real_distribution<double> uni(0.0, eps);
  for (int i = 0; i < 200; ++i) {
    const double v = uni(rng);
    const long double vl = v, el = eps;
    const long double ref = vl * vl * (3.0L * el - 2.0L * vl) / (el * el * el);
    CHECK(heaviside_eps(s, v) ==
          doctest::Approx(static_cast<double>(ref)).epsilon(1e-14));
    const long double dref = 6.0L * vl * (el - vl) / (el * el * el);
    CHECK(heaviside_eps_prime(s, v) ==
          doctest::Approx(static_cast<double>(dref)).epsilon(1e-14));
  }
}

TEST_CASE("range, monotonicity and domination by the sharp step") {
  std::mt19937_64 rng(5);
  const double eps = 0.02;
  const Smoothing s{eps};
  std::uniform_real_distribution<double> uni(-2.0 * eps, 3.0 * eps);
  double prev_v = -1e9, prev_h = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double v = uni(rng);
    const double hv = heaviside_eps(s, v);
    CHECK(hv >= 0.0);
    CHECK(hv <= 1.0);
    CHECK(hv <= heaviside(v));
    // Wider smoothing sits below narrower smoothing pointwise.
    CHECK(heaviside_eps(Smoothing{eps / 2.0}, v) >= hv);
    CHECK(heaviside_eps(Smoothing{eps / 8.0}, v) >= hv);
    if (v >= prev_v) CHECK(hv >= prev_h);
    prev_v = v;
    prev_h = hv;
  }
}

TEST_CASE("central differences reproduce the derivative") {
  std::mt19937_64 rng(9);
  for (double eps : {0.3, 0.011}) {
    const Smoothing s{eps};
    const double delta = 1e-4 * eps;
    std::uniform_real_distribution<double> uni(0.02 * eps, 0.98 * eps);
    for (int i = 0; i < 300; ++i) {
      const double v = uni(rng);
      const double fd =
          (heaviside_eps(s, v + delta) - heaviside_eps(s, v - delta)) / (2.0 * delta);
      const double dv = heaviside_eps_prime(s, v);
      CHECK(fd == doctest::Approx(dv).epsilon(1e-6));
    }
  }
}

TEST_CASE("field overloads act pointwise") {
  const GridPtr g = Grid::make_unit(9);
  const Field f = Field::from_function(g, [](double x, double) { return x - 0.5; });
  const Smoothing s{0.25};
  const Field h = heaviside(f);
  const Field he = heaviside_eps(s, f);
  const Field hp = heaviside_eps_prime(s, f);
  for (int k = 0; k < f.size(); ++k) {
    CHECK(h[k] == heaviside(f[k]));
    CHECK(he[k] == heaviside_eps(s, f[k]));
    CHECK(hp[k] == heaviside_eps_prime(s, f[k]));
  }
}
