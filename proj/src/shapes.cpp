#include "shapeopt/shapes.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

#include "shapeopt/heaviside.hpp"

namespace shapeopt {

namespace {

// 4-neighbor visitor; cb(k2) for each neighbor of node k.
template <typename Fn>
void for_each_neighbor4(const Grid& g, int k, Fn cb) {
  const int i = g.node_i(k), j = g.node_j(k);
  if (i > 0) cb(k - 1);
  if (i < g.nx() - 1) cb(k + 1);
  if (j > 0) cb(k - g.nx());
  if (j < g.ny() - 1) cb(k + g.nx());
}

template <typename Fn>
void for_each_neighbor8(const Grid& g, int k, Fn cb) {
  const int i = g.node_i(k), j = g.node_j(k);
  for (int dj = -1; dj <= 1; ++dj)
    for (int di = -1; di <= 1; ++di) {
      if (di == 0 && dj == 0) continue;
      const int ii = i + di, jj = j + dj;
      if (ii < 0 || jj < 0 || ii >= g.nx() || jj >= g.ny()) continue;
      cb(g.node(ii, jj));
    }
}

double cell_count_area(const Grid& g, const std::vector<std::uint8_t>& mask) {
  long cells = 0;
  for (int j = 0; j + 1 < g.ny(); ++j)
    for (int i = 0; i + 1 < g.nx(); ++i)
      if (mask[g.node(i, j)] && mask[g.node(i + 1, j)] && mask[g.node(i, j + 1)] &&
          mask[g.node(i + 1, j + 1)])
        ++cells;
  return double(cells) * g.h() * g.h();
}

std::vector<int> bfs_distance_impl(const Grid& g, const std::vector<int>& sources,
                                   bool diagonal,
                                   const std::vector<std::uint8_t>* restrict_to) {
  std::vector<int> dist(g.num_nodes(), std::numeric_limits<int>::max());
  std::deque<int> queue;
  for (int s : sources) {
    if (dist[s] == 0) continue;
    dist[s] = 0;
    queue.push_back(s);
  }
  auto visit = [&](int from, int to) {
    if (restrict_to && !(*restrict_to)[to]) return;
    if (dist[to] <= dist[from] + 1) return;
    dist[to] = dist[from] + 1;
    queue.push_back(to);
  };
  while (!queue.empty()) {
    const int k = queue.front();
    queue.pop_front();
    if (diagonal)
      for_each_neighbor8(g, k, [&](int n) { visit(k, n); });
    else
      for_each_neighbor4(g, k, [&](int n) { visit(k, n); });
  }
  return dist;
}

}  // namespace

std::vector<int> bfs_distance(const Grid& g, const std::vector<int>& sources,
                              bool diagonal) {
  return bfs_distance_impl(g, sources, diagonal, nullptr);
}

std::vector<int> bfs_distance(const Grid& g, const std::vector<int>& sources,
                              bool diagonal,
                              const std::vector<std::uint8_t>& restrict_to) {
  return bfs_distance_impl(g, sources, diagonal, &restrict_to);
}

ShapeMask extract_shape(const Field& g) {
  const Grid& grid = g.grid();
  ShapeMask m;
  m.grid = g.grid_ptr();
  const int n = grid.num_nodes();
  m.inside.assign(n, 0);
  for (int k = 0; k < n; ++k) m.inside[k] = g[k] < 0.0 ? 1 : 0;

  std::vector<int> seeds;
  for (int k = 0; k < n; ++k)
    if (grid.in_e(k) && m.inside[k]) seeds.push_back(k);
  if (seeds.empty())
    throw std::invalid_argument("extract_shape: no E node with g < 0");

  const std::vector<int> dist = bfs_distance_impl(grid, seeds, false, &m.inside);
  m.component.assign(n, 0);
  for (int k = 0; k < n; ++k)
    if (dist[k] != std::numeric_limits<int>::max()) m.component[k] = 1;

  for (int k = 0; k < n; ++k) {
    if (!m.component[k]) continue;
    bool boundary = grid.on_boundary(k);
    if (!boundary)
      for_each_neighbor4(grid, k, [&](int nb) {
        if (!m.component[nb]) boundary = true;
      });
    if (boundary) m.boundary_nodes.push_back(k);
  }
  m.area = cell_count_area(grid, m.component);
  return m;
}

FsReport validate_fs(const Field& g) {
  return validate_fs(g, 1e-8 * (1.0 + g.max_abs()));
}

FsReport validate_fs(const Field& g, double tau) {
  const Grid& grid = g.grid();
  FsReport r;
  r.tau = tau;
  r.max_g_on_e = -std::numeric_limits<double>::infinity();
  r.min_g_on_boundary = std::numeric_limits<double>::infinity();
  for (int k = 0; k < g.size(); ++k) {
    if (grid.in_e(k)) r.max_g_on_e = std::max(r.max_g_on_e, g[k]);
    if (grid.on_boundary(k)) r.min_g_on_boundary = std::min(r.min_g_on_boundary, g[k]);
  }
  r.neg_on_e = r.max_g_on_e < 0.0;
  r.pos_on_boundary = r.min_g_on_boundary > 0.0;

  const Field gx = diff(g, Diff::X), gy = diff(g, Diff::Y);
  double min_t = std::numeric_limits<double>::infinity();
  for (int k = 0; k < g.size(); ++k) {
    const double t = std::hypot(gx[k], gy[k]) + std::abs(g[k]);
    min_t = std::min(min_t, t);
  }
  r.min_transversality = min_t;
  r.nondegenerate = min_t > tau;
  return r;
}

double area_via_heaviside(const Field& g) {
  Field one_minus_h = apply(g, [](double v) { return 1.0 - heaviside(v); });
  return integrate(one_minus_h, Region::D);
}

std::pair<double, double> shape_distance(const Field& g1, const Field& g2) {
  if (!same_grid(g1, g2)) throw std::invalid_argument("shape_distance: grid mismatch");
  const Grid& grid = g1.grid();
  std::vector<std::uint8_t> a(grid.num_nodes()), b(grid.num_nodes());
  for (int k = 0; k < grid.num_nodes(); ++k) {
    const bool in1 = g1[k] < 0.0, in2 = g2[k] < 0.0;
    a[k] = (in1 && !in2) ? 1 : 0;
    b[k] = (!in1 && in2) ? 1 : 0;
  }
  return {cell_count_area(grid, a), cell_count_area(grid, b)};
}

Field reparametrize(const Field& g_hat, const ShapeMask& mask) {
  if (mask.grid.get() != g_hat.grid_ptr().get() ||
      static_cast<int>(mask.component.size()) != g_hat.size())
    throw std::invalid_argument("reparametrize: grid mismatch");
  const Grid& grid = g_hat.grid();
  const double gmin = g_hat.min();
  if (gmin >= 0.0)
    throw std::invalid_argument("reparametrize: control has no negative values");

  const std::vector<std::uint8_t> closure = closure_nodes(mask);
  std::vector<int> sources;
  for (int k = 0; k < grid.num_nodes(); ++k)
    if (closure[k]) sources.push_back(k);
  const std::vector<int> dist = bfs_distance_impl(grid, sources, true, nullptr);

  // Plateau must reach full amplitude before the nearest foreign negative node.
  int gap = std::numeric_limits<int>::max();
  for (int k = 0; k < grid.num_nodes(); ++k)
    if (mask.inside[k] && !mask.component[k]) gap = std::min(gap, dist[k]);
  const int width = std::max(1, std::min(4, gap));

  const double amplitude = 2.0 * (-gmin);
  Field out = g_hat;
  for (int k = 0; k < grid.num_nodes(); ++k) {
    const int d = std::min(dist[k], width);
    out[k] += amplitude * smoothstep5(double(d) / double(width));
  }
  return out;
}

std::vector<std::uint8_t> interior_nodes(const ShapeMask& mask, int layers) {
  const Grid& grid = *mask.grid;
  const std::vector<int> dist =
      bfs_distance_impl(grid, mask.boundary_nodes, false, &mask.component);
  std::vector<std::uint8_t> out(grid.num_nodes(), 0);
  for (int k = 0; k < grid.num_nodes(); ++k)
    if (mask.component[k] && dist[k] >= layers) out[k] = 1;
  return out;
}

std::vector<std::uint8_t> closure_nodes(const ShapeMask& mask) {
  const Grid& grid = *mask.grid;
  std::vector<std::uint8_t> out = mask.component;
  for (int k = 0; k < grid.num_nodes(); ++k) {
    if (!mask.component[k]) continue;
    for_each_neighbor4(grid, k, [&](int nb) { out[nb] = 1; });
  }
  return out;
}

std::vector<std::uint8_t> exterior_nodes(const ShapeMask& mask) {
  std::vector<std::uint8_t> out = closure_nodes(mask);
  for (auto& v : out) v = v ? 0 : 1;
  return out;
}

}  // namespace shapeopt
