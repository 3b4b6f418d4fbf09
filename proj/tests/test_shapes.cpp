#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <climits>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "shapeopt/grid.hpp"
#include "shapeopt/shapes.hpp"

using namespace shapeopt;

namespace {
constexpr double kPi = 3.14159265358979323846;

Field disk_sdf(const GridPtr& g, double cx, double cy, double r) {
  return Field::from_function(
      g, [=](double x, double y) { return std::hypot(x - cx, y - cy) - r; });
}
}  // namespace

TEST_CASE("disk extraction recovers the disk area") {
  const GridPtr g = Grid::make_unit(65);
  const double rho = 0.3;
  const ShapeMask mask = extract_shape(disk_sdf(g, 0.5, 0.5, rho));
  const double exact = kPi * rho * rho;
  // Cell counting rounds the rim inward by at most one cell layer.
  CHECK(std::abs(mask.area - exact) <= 3.0 * g->h() * 2.0 * kPi * rho);
  CHECK(mask.area <= exact + 1e-12);
  // Single pocket: the component is the whole sublevel set.
  CHECK(mask.component == mask.inside);
}

TEST_CASE("boundary nodes are exactly the exposed component nodes") {
  const GridPtr g = Grid::make_unit(33);
  const ShapeMask mask = extract_shape(disk_sdf(g, 0.5, 0.5, 0.28));
  std::vector<std::uint8_t> expect(g->num_nodes(), 0);
  for (int j = 0; j < g->ny(); ++j)
    for (int i = 0; i < g->nx(); ++i) {
      const int k = g->node(i, j);
      if (!mask.component[k]) continue;
      if (g->on_boundary(k)) {
        expect[k] = 1;
        continue;
      }
      const int nb[4] = {g->node(i - 1, j), g->node(i + 1, j), g->node(i, j - 1),
                         g->node(i, j + 1)};
      for (int kn : nb)
        if (!mask.component[kn]) expect[k] = 1;
    }
  std::vector<std::uint8_t> got(g->num_nodes(), 0);
  for (int k : mask.boundary_nodes) got[k] = 1;
  CHECK(got == expect);
}

TEST_CASE("extraction requires a negative node on E") {
  const GridPtr g = Grid::make_unit(17);
  CHECK_THROWS_AS(extract_shape(Field(g, 1.0)), std::invalid_argument);
}

TEST_CASE("heaviside area dominates the cell-counted area") {
  const GridPtr g = Grid::make_unit(65);
  const Field ls = disk_sdf(g, 0.5, 0.5, 0.3);
  const ShapeMask mask = extract_shape(ls);
  const double av = area_via_heaviside(ls);
  CHECK(av >= mask.area - 1e-12);
  CHECK(std::abs(av - kPi * 0.09) <= 3.0 * g->h() * 2.0 * kPi * 0.3);
}

TEST_CASE("shape distance between nested disks") {
  const GridPtr g = Grid::make_unit(129);
  const Field big = disk_sdf(g, 0.5, 0.5, 0.3);
  const Field small = disk_sdf(g, 0.5, 0.5, 0.25);
  const auto [gain, loss] = shape_distance(big, small);
  // {big < 0, small >= 0} is the annulus; the reverse set is empty. Cell
  // counting clips a band of width <= h at both rims.
  const double annulus = kPi * (0.09 - 0.0625);
  const double rim_budget = 2.0 * g->h() * 2.0 * kPi * (0.3 + 0.25);
  CHECK(gain > 0.0);
  CHECK(std::abs(gain - annulus) <= rim_budget);
  CHECK(loss == 0.0);
  const auto [gain2, loss2] = shape_distance(small, big);
  CHECK(gain2 == 0.0);
  CHECK(std::abs(loss2 - annulus) <= rim_budget);
}

TEST_CASE("admissibility report flags each failure mode") {
  const GridPtr g = Grid::make_unit(33);

  const FsReport ok = validate_fs(disk_sdf(g, 0.5, 0.5, 0.3));
  CHECK(ok.pass());
  CHECK(ok.max_g_on_e < 0.0);
  CHECK(ok.min_g_on_boundary > 0.0);
  CHECK(ok.min_transversality > ok.tau);

  const FsReport all_neg = validate_fs(Field(g, -1.0));
  CHECK_FALSE(all_neg.pass());
  CHECK(all_neg.neg_on_e);
  CHECK_FALSE(all_neg.pos_on_boundary);

  const FsReport all_pos = validate_fs(Field(g, 1.0));
  CHECK_FALSE(all_pos.pass());
  CHECK_FALSE(all_pos.neg_on_e);
  CHECK(all_pos.pos_on_boundary);

  // Plateau at zero along a ring: gradient and value both vanish there.
  const Field flat = Field::from_function(g, [](double x, double y) {
    const double r = std::hypot(x - 0.5, y - 0.5) - 0.3;
    return r < 0.0 ? r : 0.0;
  });
  const FsReport degen = validate_fs(flat);
  CHECK_FALSE(degen.pass());
  CHECK_FALSE(degen.nondegenerate);
}

TEST_CASE("reparametrization clears disconnected pockets") {
  const GridPtr g = Grid::make_unit(65);
  // Main disk through E plus a separate pocket near a corner.
  const Field base = Field::from_function(g, [](double x, double y) {
    const double main_d = std::hypot(x - 0.5, y - 0.5) - 0.3;
    const double pocket = std::hypot(x - 0.85, y - 0.15) - 0.08;
    return std::min(main_d, pocket);
  });
  const ShapeMask mask = extract_shape(base);
  // The pocket is inside but not in the E-component.
  bool stray = false;
  for (int k = 0; k < g->num_nodes(); ++k)
    if (mask.inside[k] && !mask.component[k]) stray = true;
  CHECK(stray);

  const Field rep = reparametrize(base, mask);
  const ShapeMask mrep = extract_shape(rep);
  CHECK(mrep.component == mask.component);
  CHECK(mrep.boundary_nodes == mask.boundary_nodes);
  CHECK(mrep.area == mask.area);
  CHECK(mrep.inside == mrep.component);
  for (int k = 0; k < g->num_nodes(); ++k) {
    if (mask.component[k]) CHECK(rep[k] == base[k]);
    if (!mask.component[k]) CHECK(rep[k] >= 0.0);
  }
}

TEST_CASE("interior, closure, and exterior partitions") {
  const GridPtr g = Grid::make_unit(65);
  const ShapeMask mask = extract_shape(disk_sdf(g, 0.5, 0.5, 0.3));
  const std::vector<std::uint8_t> in1 = interior_nodes(mask, 1);
  const std::vector<std::uint8_t> in3 = interior_nodes(mask, 3);
  const std::vector<std::uint8_t> clo = closure_nodes(mask);
  const std::vector<std::uint8_t> ext = exterior_nodes(mask);
  int n1 = 0, n3 = 0;
  for (int k = 0; k < g->num_nodes(); ++k) {
    if (in1[k]) ++n1;
    if (in3[k]) ++n3;
    if (in3[k]) CHECK(in1[k]);      // deeper layers nest
    if (in1[k]) CHECK(mask.component[k]);
    if (mask.component[k]) CHECK(clo[k]);
    CHECK((ext[k] ^ clo[k]) == 1);  // exact complement
    if (in1[k]) CHECK_FALSE(ext[k]);
  }
  CHECK(n3 < n1);
  CHECK(n3 > 0);
  // Boundary nodes are excluded from every interior layer.
  for (int k : mask.boundary_nodes) {
    CHECK_FALSE(in1[k]);
    CHECK_FALSE(ext[k]);
  }
}

TEST_CASE("bfs distances are Chebyshev layers under diagonal stepping") {
  const GridPtr g = Grid::make_unit(17);
  const std::vector<int> src = {g->node(0, 0)};
  const std::vector<int> dcheb = bfs_distance(*g, src, true);
  const std::vector<int> dman = bfs_distance(*g, src, false);
  for (int j = 0; j < g->ny(); ++j)
    for (int i = 0; i < g->nx(); ++i) {
      CHECK(dcheb[g->node(i, j)] == std::max(i, j));
      CHECK(dman[g->node(i, j)] == i + j);
    }
}

TEST_CASE("restricted bfs reports unreachable nodes") {
  const GridPtr g = Grid::make_unit(17);
  // Restrict to the left half; right-half nodes are unreachable.
  std::vector<std::uint8_t> left(g->num_nodes(), 0);
  for (int j = 0; j < g->ny(); ++j)
    for (int i = 0; i < g->nx(); ++i)
      if (g->x(i) < 0.45) left[g->node(i, j)] = 1;
  const std::vector<int> d = bfs_distance(*g, {g->node(0, 0)}, false, left);
  CHECK(d[g->node(0, 0)] == 0);
  CHECK(d[g->node(1, 0)] == 1);
  CHECK(d[g->node(g->nx() - 1, 0)] == INT_MAX);
}

TEST_CASE("quintic ramp endpoints and midpoint") {
  CHECK(smoothstep5(-1.0) == 0.0);
  CHECK(smoothstep5(0.0) == 0.0);
  CHECK(smoothstep5(1.0) == 1.0);
  CHECK(smoothstep5(2.0) == 1.0);
  CHECK(smoothstep5(0.5) == 0.5);
  double prev = 0.0;
  for (int i = 0; i <= 100; ++i) {
    const double v = smoothstep5(i / 100.0);
    CHECK(v >= prev);
    prev = v;
  }
}
