#include "shapeopt/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

#include "shapeopt/errors.hpp"

namespace shapeopt {

namespace {

void require_window(const Grid& grid, int m, const char* where) {
  if (m < 1) throw std::invalid_argument(std::string(where) + ": m must be >= 1");
  if (1.0 / m >= grid.e_gap_to_boundary())
    throw std::invalid_argument(std::string(where) +
                                ": 1/m must stay below the E-to-boundary gap");
}

std::vector<int> e_nodes(const Grid& grid) {
  std::vector<int> nodes;
  for (int k = 0; k < grid.num_nodes(); ++k)
    if (grid.in_e(k)) nodes.push_back(k);
  return nodes;
}

// Normalized one-dimensional profile (1 - s^2)^3 sampled at node offsets.
std::vector<double> kernel_1d(int radius, double mh) {
  std::vector<double> w(2 * radius + 1);
  double sum = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    const double s = k * mh;
    const double t = std::max(0.0, 1.0 - s * s);
    w[k + radius] = t * t * t;
    sum += w[k + radius];
  }
  for (double& v : w) v /= sum;
  return w;
}

// Separable convolution, boundary values replicated: a convex average, so
// no new extrema and sign constraints on full windows survive.
Field convolve(const Field& f, const std::vector<double>& k1d) {
  const Grid& g = f.grid();
  const int radius = (static_cast<int>(k1d.size()) - 1) / 2;
  Field tmp(f.grid_ptr(), 0.0), out(f.grid_ptr(), 0.0);
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      double acc = 0.0;
      for (int o = -radius; o <= radius; ++o) {
        const int ii = std::clamp(i + o, 0, g.nx() - 1);
        acc += k1d[o + radius] * f.at(ii, j);
      }
      tmp.at(i, j) = acc;
    }
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      double acc = 0.0;
      for (int o = -radius; o <= radius; ++o) {
        const int jj = std::clamp(j + o, 0, g.ny() - 1);
        acc += k1d[o + radius] * tmp.at(i, jj);
      }
      out.at(i, j) = acc;
    }
  return out;
}

}  // namespace

Field clamp_and_mollify(const Field& g, int m) {
  const Grid& grid = g.grid();
  require_window(grid, m, "clamp_and_mollify");

  const std::vector<int> cheb = bfs_distance(grid, e_nodes(grid), true);
  Field clamped = g;
  for (int k = 0; k < clamped.size(); ++k)
    if (cheb[k] != std::numeric_limits<int>::max() && cheb[k] * grid.h() <= 1.0 / m)
      clamped[k] = std::min(clamped[k], 0.0);

  const int radius = static_cast<int>(std::floor(1.0 / (m * grid.h())));
  if (radius == 0) return clamped;
  return convolve(clamped, kernel_1d(radius, m * grid.h()));
}

Field boundary_lift(const Field& g, int m) {
  const Grid& grid = g.grid();
  require_window(grid, m, "boundary_lift");

  double min_bd = std::numeric_limits<double>::infinity();
  for (int k = 0; k < g.size(); ++k)
    if (grid.on_boundary(k)) min_bd = std::min(min_bd, g[k]);
  const double height = -2.0 * std::min(min_bd, 0.0) + 1.0 / m;

  const Rect& d = grid.domain();
  Field out = g;
  for (int j = 0; j < grid.ny(); ++j)
    for (int i = 0; i < grid.nx(); ++i) {
      const double dist = std::min(std::min(grid.x(i) - d.x0, d.x1 - grid.x(i)),
                                   std::min(grid.y(j) - d.y0, d.y1 - grid.y(j)));
      out.at(i, j) += height * smoothstep5(1.0 - dist * m);
    }
  return out;
}

SardShiftResult sard_shift(const Field& g, int m, double delta_cap,
                           std::mt19937_64& rng) {
  const Grid& grid = g.grid();
  if (m < 1) throw std::invalid_argument("sard_shift: m must be >= 1");

  double max_e = -std::numeric_limits<double>::infinity();
  double min_bd = std::numeric_limits<double>::infinity();
  for (int k = 0; k < g.size(); ++k) {
    if (grid.in_e(k)) max_e = std::max(max_e, g[k]);
    if (grid.on_boundary(k)) min_bd = std::min(min_bd, g[k]);
  }
  if (max_e > 0.0) throw std::invalid_argument("sard_shift: g must be <= 0 on E");
  if (min_bd <= 0.0)
    throw std::invalid_argument("sard_shift: g must be > 0 on the outer boundary");

  const double delta_hi = std::min({1.0 / m, delta_cap, min_bd});
  const Field gx = diff(g, Diff::X), gy = diff(g, Diff::Y);
  Field grad_mag(g.grid_ptr(), 0.0);
  for (int k = 0; k < g.size(); ++k) grad_mag[k] = std::hypot(gx[k], gy[k]);
  const double tau_req = std::max(1e-6, 2e-8 * (1.0 + g.max_abs()));

  // Bump vanishing on the shifted sublevel set, rising to a small plateau.
  const double bump_scale = 0.05;
  const int ramp_nodes = 3;

  auto attempt = [&](double delta) -> std::optional<Field> {
    // The shift must dodge near-critical values; transversality along the
    // resulting zero level is judged by validate_fs below.
    for (int k = 0; k < g.size(); ++k)
      if (grad_mag[k] <= tau_req && std::abs(g[k] - delta) <= tau_req)
        return std::nullopt;

    std::vector<int> seeds;
    for (int k = 0; k < g.size(); ++k)
      if (g[k] <= delta) seeds.push_back(k);
    const std::vector<int> dist = bfs_distance(grid, seeds, true);
    Field out = g;
    for (int k = 0; k < g.size(); ++k) {
      const double t = double(std::min(dist[k], ramp_nodes)) / double(ramp_nodes);
      out[k] += -delta + (bump_scale / m) * smoothstep5(t);
    }
    if (!validate_fs(out).pass()) return std::nullopt;
    return out;
  };

  std::uniform_real_distribution<double> uni(0.05, 0.3);
  for (int retry = 0; retry <= 50; ++retry) {
    const double delta = retry == 0 ? 0.1 * delta_hi : uni(rng) * delta_hi;
    if (auto out = attempt(delta))
      return SardShiftResult{std::move(*out), delta, retry};
  }
  throw solver_error("sard_shift: no admissible level shift after 50 retries");
}

FsProjection project_to_fs(const Field& g, double target_error,
                           std::mt19937_64& rng, int m_start) {
  const Grid& grid = g.grid();
  const int m_geom = static_cast<int>(std::floor(1.0 / grid.e_gap_to_boundary())) + 1;
  int m = std::max(m_start, m_geom);
  const int m_max =
      std::max(m, static_cast<int>(std::floor(1.0 / (2.0 * grid.h()))));

  std::optional<FsProjection> best;
  double delta_cap = std::numeric_limits<double>::infinity();
  std::string last_failure;
  while (m <= m_max) {
    try {
      Field smooth = clamp_and_mollify(g, m);
      Field lifted = boundary_lift(smooth, m);
      SardShiftResult shifted = sard_shift(lifted, m, delta_cap, rng);
      delta_cap = shifted.delta;
      FsProjection cand{shifted.g, validate_fs(shifted.g),
                        norm(shifted.g - g, Norm::L2_D), m, shifted.delta};
      if (cand.report.pass() && (!best || cand.error_l2 < best->error_l2)) best = cand;
      if (best && best->error_l2 <= target_error) return *best;
    } catch (const solver_error& e) {
      last_failure = e.what();
    }
    m *= 2;
  }
  if (best) return *best;
  throw solver_error("project_to_fs: no admissible control up to m = " +
                     std::to_string(m_max) +
                     (last_failure.empty() ? "" : "; last failure: " + last_failure));
}

}  // namespace shapeopt
