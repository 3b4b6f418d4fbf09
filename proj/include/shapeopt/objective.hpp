#pragma once

#include <memory>

#include "shapeopt/pde.hpp"

namespace shapeopt {

/// Gram operator of the control-space inner product: L2 over D plus the full
/// second-order inner product over D minus closure(E), assembled from the
/// shared difference stencils. u . apply(v) equals the W inner product of u
/// and v in the Euclidean pairing.
class WOperator {
 public:
  explicit WOperator(GridPtr grid);

  const GridPtr& grid() const;
  double inner(const Field& u, const Field& v) const;
  double norm_w(const Field& u) const;
  /// A_W u.
  Field apply(const Field& u) const;
  /// M^{-1} A_W u: the L2(D)-metric representative of the W pairing with u.
  Field riesz_l2(const Field& u) const;
  /// A_W^{-1} M u: lifts an L2-metric gradient to its W-metric representative.
  Field solve_w(const Field& u) const;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

struct ProblemData {
  ProblemData(Field f, Field y_d, double alpha, NonsmoothMap beta, Field anchor);

  Field f;
  Field y_d;
  double alpha;
  NonsmoothMap beta;
  Field anchor;  ///< proximal center g_bar
  SolverConfig solver{};
  std::shared_ptr<const WOperator> w;
};

/// Discrete membership in F: g <= 0 at every E node.
bool in_f_discrete(const Field& g);

struct ObjectiveBreakdown {
  double tracking = 0.0;
  double volume = 0.0;
  double proximal = 0.0;
  double total = 0.0;
};

/// Penalized objective: tracking on E + alpha * volume(1 - H_eps(g)) +
/// 1/2 |g - anchor|_W^2. Throws std::invalid_argument when g leaves F.
ObjectiveBreakdown j_eps_parts(const ProblemData& data, Smoothing s, const Field& g,
                               StateSolve* state_out = nullptr);
double j_eps(const ProblemData& data, Smoothing s, const Field& g);

/// Sharp-interface objective through the masked reference solve. Requires
/// validate_fs(g) to pass.
double J_sharp(const ProblemData& data, const Field& g);

/// L2(D)-metric gradient of j_eps via the adjoint state; exact for the
/// implemented discretization, so central differences of j_eps reproduce it.
Field gradient_j_eps(const ProblemData& data, Smoothing s, const Field& g);
Field gradient_from_state(const ProblemData& data, Smoothing s, const Field& g,
                          const StateSolve& state);

struct JEpsEval {
  ObjectiveBreakdown parts;
  StateSolve state;
  Field grad;
};

JEpsEval eval_j_eps(const ProblemData& data, Smoothing s, const Field& g);

}  // namespace shapeopt
