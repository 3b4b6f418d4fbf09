#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "shapeopt/grid.hpp"

namespace shapeopt {

/// Discrete shape attached to a control g: the strict sublevel set {g < 0}
/// and its 4-connected component reachable from E.
struct ShapeMask {
  GridPtr grid;
  std::vector<std::uint8_t> inside;     ///< g < 0 per node
  std::vector<std::uint8_t> component;  ///< E-component of inside
  /// Component nodes adjacent to a non-component node, plus component nodes
  /// on ∂D; these carry the homogeneous Dirichlet data in masked solves.
  std::vector<int> boundary_nodes;
  double area = 0.0;  ///< cells with all four corners in the component, times h^2
};

/// Flood fill from the E nodes with g < 0. Throws std::invalid_argument when
/// E contains no such node.
ShapeMask extract_shape(const Field& g);

struct FsReport {
  bool neg_on_e = false;
  bool pos_on_boundary = false;
  bool nondegenerate = false;
  double max_g_on_e = 0.0;
  double min_g_on_boundary = 0.0;
  double min_transversality = 0.0;  ///< min over nodes of |grad_h g| + |g|
  double tau = 0.0;
  bool pass() const { return neg_on_e && pos_on_boundary && nondegenerate; }
};

/// Admissibility check: g < 0 on E, g > 0 on ∂D, |grad_h g| + |g| > tau
/// everywhere. The default tau is 1e-8 * (1 + max|g|).
FsReport validate_fs(const Field& g, double tau);
FsReport validate_fs(const Field& g);

/// Trapezoid integral of 1 - H(g); counts every node with g <= 0 and hence
/// dominates the component area.
double area_via_heaviside(const Field& g);

/// Cell-counted measures of {g1 < 0, g2 >= 0} and {g1 >= 0, g2 < 0}.
std::pair<double, double> shape_distance(const Field& g1, const Field& g2);

/// Adds a plateau that vanishes on the closed component and clears every
/// other negative node, so the output equals g_hat on the shape and is
/// nonnegative elsewhere. Requires min g_hat < 0.
Field reparametrize(const Field& g_hat, const ShapeMask& mask);

/// Component nodes at 4-connected distance >= layers from boundary_nodes.
std::vector<std::uint8_t> interior_nodes(const ShapeMask& mask, int layers);
/// Component plus its 4-neighbors.
std::vector<std::uint8_t> closure_nodes(const ShapeMask& mask);
/// Complement of closure_nodes.
std::vector<std::uint8_t> exterior_nodes(const ShapeMask& mask);

/// Multi-source BFS node distances over the whole grid (or a restricted node
/// set); diagonal = true walks 8-neighborhoods and yields Chebyshev layers.
/// Unreachable nodes report INT_MAX.
std::vector<int> bfs_distance(const Grid& g, const std::vector<int>& sources,
                              bool diagonal);
std::vector<int> bfs_distance(const Grid& g, const std::vector<int>& sources,
                              bool diagonal,
                              const std::vector<std::uint8_t>& restrict_to);

/// Quintic ramp: 0 at t <= 0, 1 at t >= 1, C^2 joins.
inline double smoothstep5(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

}  // namespace shapeopt
