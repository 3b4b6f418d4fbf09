#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "doctest.h"
#include "shapeopt/errors.hpp"
#include "shapeopt/grid.hpp"

using namespace shapeopt;

namespace {
const double kPi = std::acos(-1.0);

Field random_field(const GridPtr& grid, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Field f(grid);
  for (int k = 0; k < f.size(); ++k) f[k] = uni(rng);
  return f;
}
}  // namespace

TEST_CASE("node indexing round trips and coordinates are affine") {
  const GridPtr g = Grid::make_unit(33);
  CHECK(g->nx() == 33);
  CHECK(g->num_nodes() == 33 * 33);
  CHECK(g->h() == doctest::Approx(1.0 / 32).epsilon(1e-15));
  for (int j = 0; j < g->ny(); j += 7)
    for (int i = 0; i < g->nx(); i += 5) {
      const int k = g->node(i, j);
      CHECK(g->node_i(k) == i);
      CHECK(g->node_j(k) == j);
    }
  CHECK(g->x(0) == 0.0);
  CHECK(g->x(32) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(g->on_boundary(0, 5));
  CHECK(g->on_boundary(g->node(32, 17)));
  CHECK_FALSE(g->on_boundary(1, 1));
}

TEST_CASE("grid construction rejects bad geometry") {
  CHECK_THROWS_AS(Grid::make(2, 5, Rect{0, 0, 1, 1}, ERegion{}), std::invalid_argument);
  // Unequal spacing on the two axes.
  CHECK_THROWS_AS(Grid::make(11, 21, Rect{0, 0, 1, 1}, ERegion{}), std::invalid_argument);
  // E touching the boundary violates the 2h clearance.
  CHECK_THROWS_AS(Grid::make_unit(17, ERegion::rectangle(Rect{0.0, 0.0, 0.5, 0.5})),
                  std::invalid_argument);
}

TEST_CASE("quadrature weights reproduce areas") {
  const GridPtr g = Grid::make_unit(65);
  const auto& wd = g->weights_d();
  const auto& we = g->weights_e();
  const auto& wde = g->weights_d_minus_e();
  const double sum_d = std::accumulate(wd.begin(), wd.end(), 0.0);
  const double sum_e = std::accumulate(we.begin(), we.end(), 0.0);
  CHECK(sum_d == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sum_e == doctest::Approx(0.25 * 0.25).epsilon(1e-12));
  for (int k = 0; k < g->num_nodes(); ++k)
    CHECK(wde[k] == doctest::Approx(wd[k] - we[k]).epsilon(1e-15));

  // Non-unit rectangle with square cells.
  const GridPtr g2 = Grid::make(129, 65, Rect{0, 0, 2, 1},
                                ERegion::rectangle(Rect{0.75, 0.375, 1.25, 0.625}));
  const auto& wd2 = g2->weights_d();
  CHECK(std::accumulate(wd2.begin(), wd2.end(), 0.0) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("mask weights count full cells") {
  const GridPtr g = Grid::make_unit(17);
  std::vector<std::uint8_t> all(g->num_nodes(), 1);
  const std::vector<double> wall = g->mask_weights(all);
  for (int k = 0; k < g->num_nodes(); ++k)
    CHECK(wall[k] == doctest::Approx(g->weights_d()[k]).epsilon(1e-15));

  // A single 2x2 node block spans exactly one cell.
  std::vector<std::uint8_t> block(g->num_nodes(), 0);
  block[g->node(5, 5)] = block[g->node(6, 5)] = block[g->node(5, 6)] = block[g->node(6, 6)] = 1;
  const std::vector<double> wb = g->mask_weights(block);
  const double h2 = g->h() * g->h();
  CHECK(std::accumulate(wb.begin(), wb.end(), 0.0) == doctest::Approx(h2).epsilon(1e-14));
  CHECK(wb[g->node(5, 5)] == doctest::Approx(h2 / 4).epsilon(1e-14));

  std::vector<std::uint8_t> none(g->num_nodes(), 0);
  const std::vector<double> wn = g->mask_weights(none);
  CHECK(std::accumulate(wn.begin(), wn.end(), 0.0) == 0.0);
}

TEST_CASE("e region variants and the boundary gap") {
  const GridPtr g = Grid::make_unit(65);
  CHECK(g->e_gap_to_boundary() == doctest::Approx(0.375).epsilon(1e-12));
  CHECK(g->e_node_count() > 0);
  int count = 0;
  for (int k = 0; k < g->num_nodes(); ++k)
    if (g->in_e(k)) ++count;
  CHECK(count == g->e_node_count());

  const GridPtr gd = Grid::make_unit(65, ERegion::disk_region(0.5, 0.5, 0.125));
  int dcount = 0;
  for (int j = 0; j < gd->ny(); ++j)
    for (int i = 0; i < gd->nx(); ++i) {
      const bool inside = std::hypot(gd->x(i) - 0.5, gd->y(j) - 0.5) <= 0.125;
      CHECK(gd->in_e(i, j) == inside);
      if (inside) ++dcount;
    }
  CHECK(gd->e_node_count() == dcount);
}

TEST_CASE("trapezoid integral of the separable sine product") {
  // Exact value of the integral over the unit square is 4/pi^2.
  const GridPtr g = Grid::make_unit(129);
  const Field f = Field::from_function(
      g, [](double x, double y) { return std::sin(kPi * x) * std::sin(kPi * y); });
  const double exact = 4.0 / (kPi * kPi);
  CHECK(integrate(f, Region::D) == doctest::Approx(exact).epsilon(1e-4));

  // E and its complement partition D for the trapezoid weights.
  const double onE = integrate(f, Region::E);
  const double off = integrate(f, Region::DMinusEbar);
  CHECK(onE + off == doctest::Approx(integrate(f, Region::D)).epsilon(1e-13));
}

TEST_CASE("field arithmetic and extrema") {
  const GridPtr g = Grid::make_unit(17);
  Field a(g, 2.0);
  const Field b = Field::from_function(g, [](double x, double) { return x; });
  a += b;
  CHECK(a.at(0, 3) == doctest::Approx(2.0));
  CHECK(a.at(16, 3) == doctest::Approx(3.0));
  a -= b;
  a *= 0.5;
  CHECK(a.max() == doctest::Approx(1.0));
  CHECK(a.min() == doctest::Approx(1.0));
  const Field c = 3.0 * b - b;
  CHECK(c.max() == doctest::Approx(2.0));
  CHECK((b * b).at(8, 8) == doctest::Approx(0.25));
  CHECK(apply(b, [](double v) { return -v; }).min() == doctest::Approx(-1.0));
  CHECK(c.max_abs() == doctest::Approx(2.0));

  Field bad(g, 1.0);
  bad[5] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(bad.check_finite("test"), solver_error);
  CHECK_FALSE(same_grid(a, Field(Grid::make_unit(9))));
}

TEST_CASE("norms against closed forms") {
  const GridPtr g = Grid::make_unit(65);
  const Field c(g, 3.0);
  CHECK(norm(c, Norm::L2_D) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(norm(c, Norm::L2_E) == doctest::Approx(3.0 * 0.25).epsilon(1e-12));

  // f = x: gradient is exactly (1, 0) for the second-order stencils.
  const Field fx = Field::from_function(g, [](double x, double) { return x; });
  const double l2sq = 1.0 / 3.0;
  CHECK(norm(fx, Norm::H1_D) == doctest::Approx(std::sqrt(l2sq + 1.0)).epsilon(1e-4));

  std::mt19937_64 rng(7);
  const Field r = random_field(g, rng);
  CHECK(inner_l2_d(r, r) == doctest::Approx(norm(r, Norm::L2_D) * norm(r, Norm::L2_D))
                                 .epsilon(1e-12));
  CHECK(norm(r, Norm::W) >= norm(r, Norm::L2_D) * (1.0 - 1e-12));
}

TEST_CASE("difference quotients are exact on polynomials") {
  const GridPtr g = Grid::make_unit(33);
  const Field q = Field::from_function(
      g, [](double x, double y) { return 2.0 * x * x + 3.0 * x * y - y * y + x - 4.0; });
  const Field qx = diff(q, Diff::X);
  const Field qy = diff(q, Diff::Y);
  const Field qxx = diff(q, Diff::XX);
  const Field qyy = diff(q, Diff::YY);
  const Field qxy = diff(q, Diff::XY);
  for (int j = 0; j < g->ny(); j += 3)
    for (int i = 0; i < g->nx(); i += 3) {
      const double x = g->x(i), y = g->y(j);
      CHECK(qx.at(i, j) == doctest::Approx(4.0 * x + 3.0 * y + 1.0).epsilon(1e-10));
      CHECK(qy.at(i, j) == doctest::Approx(3.0 * x - 2.0 * y).epsilon(1e-10));
      CHECK(qxx.at(i, j) == doctest::Approx(4.0).epsilon(1e-8));
      CHECK(qyy.at(i, j) == doctest::Approx(-2.0).epsilon(1e-8));
    }
  // The mixed stencil is exact away from the one-sided boundary columns.
  for (int j = 2; j < g->ny() - 2; j += 3)
    for (int i = 2; i < g->nx() - 2; i += 3)
      CHECK(qxy.at(i, j) == doctest::Approx(3.0).epsilon(1e-8));
}

TEST_CASE("difference operator entries reproduce the stencil application") {
  const GridPtr g = Grid::make_unit(17);
  std::mt19937_64 rng(11);
  const Field f = random_field(g, rng);
  for (Diff d : {Diff::X, Diff::Y, Diff::XX, Diff::YY}) {
    const Field direct = diff(f, d);
    std::vector<double> assembled(g->num_nodes(), 0.0);
    for_each_diff_entry(*g, d, [&](int row, int col, double coeff) {
      assembled[row] += coeff * f[col];
    });
    for (int k = 0; k < g->num_nodes(); ++k)
      CHECK(assembled[k] == doctest::Approx(direct[k]).epsilon(1e-12));
  }
  CHECK_THROWS_AS(for_each_diff_entry(*g, Diff::XY, [](int, int, double) {}),
                  std::invalid_argument);
}
