#pragma once

#include <span>

#include "shapeopt/grid.hpp"
#include "shapeopt/heaviside.hpp"
#include "shapeopt/nonsmooth.hpp"
#include "shapeopt/shapes.hpp"

namespace shapeopt {

struct SolverConfig {
  /// Newton stops when the discrete L2 residual drops below
  /// tol_rel * (1 + ||rhs||_L2).
  double tol_rel = 1e-10;
  int max_iters = 200;
  /// Include the +eps*g source term in the penalized state equation.
  bool eps_g_source = true;
};

struct StateSolve {
  Field y;
  int newton_iters = 0;
  int picard_steps = 0;
  double residual = 0.0;
  double rhs_norm = 0.0;
};

/// Penalized state on all of D with zero boundary values:
///   -lap y + beta(y) + (1/eps) H_eps(g) y = f (+ eps g),
/// five-point stencil, boundary rows eliminated. Throws solver_error on
/// non-convergence or NaN contamination.
StateSolve solve_state(const NonsmoothMap& beta, Smoothing s, const Field& g,
                       const Field& f, const SolverConfig& cfg = {});

/// Reference solve on the masked shape: -lap y + beta(y) = f inside the
/// component, y = 0 on mask boundary nodes and outside. The mask must
/// contain every E node.
StateSolve solve_masked(const NonsmoothMap& beta, const ShapeMask& mask,
                        const Field& f, const SolverConfig& cfg = {});

/// Linearized adjoint at state y:
///   -lap p + beta'(y) p + (1/eps) H_eps(g) p = 2 (y - y_d) chi_E,
/// where chi_E is the quadrature mask of E (weights_e / h^2). beta'(y) is the
/// right-hand subderivative.
Field solve_adjoint(const NonsmoothMap& beta, Smoothing s, const Field& g,
                    const Field& y, const Field& y_d,
                    const SolverConfig& cfg = {});

struct AprioriRecord {
  double g_l2 = 0.0;
  double y_h1 = 0.0;
  double eps = 0.0;
};

AprioriRecord apriori_record(const StateSolve& solve, Smoothing s, const Field& g);

/// Affine regression ||y||_H1 <= c1 + c2 ||g||_L2 over a batch of runs;
/// monitoring only, max_rel_residual measures the fit quality.
struct AprioriReport {
  double c1 = 0.0;
  double c2 = 0.0;
  double max_rel_residual = 0.0;
  int count = 0;
};

AprioriReport apriori_bound_check(std::span<const AprioriRecord> records);

}  // namespace shapeopt
