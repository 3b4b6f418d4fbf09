#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "shapeopt/density.hpp"
#include "shapeopt/objective.hpp"

namespace shapeopt {

struct Ball {
  Field center;
  double radius = 0.0;
};

/// L2 projection onto the discrete control set: clamp to min(g, 0) on E,
/// then, when a ball is given, alternate radial rescaling around the center
/// with the clamp (<= 20 rounds, ending on the clamp so the E constraint is
/// exact and the ball holds to 1e-12 relative).
Field project_f(Field g, const std::optional<Ball>& ball = std::nullopt);

struct EpsSchedule {
  double eps0 = 0.1;
  double ratio = 0.5;
  double eps_min = 1e-4;
};

struct OptimizerConfig {
  int max_iters = 100;
  double armijo_c1 = 1e-4;
  double shrink = 0.5;
  double step0 = 1.0;
  double step_floor = 1e-12;
  double grad_tol = 1e-8;
  /// Trust diameter r: iterates stay in the ball of radius r/2 around the
  /// anchor. Disabled when unset.
  std::optional<double> trust_radius;
  /// Use the W-metric representative of the gradient as descent direction.
  /// The raw L2 gradient of the proximal term is fourth-order stiff in h.
  bool precondition = true;
  EpsSchedule schedule{};
  /// Depth (in node layers) defining the deep interior for the continuation
  /// diagnostics.
  int interior_layers = 3;
  double cert_target_rel = 0.05;
  int cert_m_start = 4;

  void validate() const;  ///< throws std::invalid_argument on bad ranges
};

enum class StopReason { GradTol, StepFloor, MaxIters };
const char* to_string(StopReason r);

struct IterRecord {
  int iter = 0;
  double eps = 0.0;
  double j = 0.0;
  double tracking = 0.0;
  double volume = 0.0;
  double proximal = 0.0;
  double step = 0.0;
  double grad_norm = 0.0;  ///< L2(D) gradient norm where the step started
  double dist_anchor_l2 = 0.0;
  double shape_gain = 0.0;  ///< area entering the sublevel set this step
  double shape_loss = 0.0;  ///< area leaving it
};

struct FixedEpsResult {
  Field g;
  ObjectiveBreakdown parts;
  StateSolve state;
  Field grad;
  double grad_norm = 0.0;
  StopReason stop = StopReason::MaxIters;
  int iters = 0;
  int evals = 0;
  std::vector<IterRecord> trace;
};

/// Projected gradient descent at fixed smoothing width. Requires g0 feasible
/// (throws std::invalid_argument otherwise); accepted objective values are
/// nonincreasing; solver failures propagate.
FixedEpsResult minimize_fixed_eps(const ProblemData& data, Smoothing s, Field g0,
                                  const OptimizerConfig& cfg = {});

struct PhaseRecord {
  double eps = 0.0;
  int iters = 0;
  int evals = 0;
  StopReason stop = StopReason::MaxIters;
  double j_end = 0.0;
  ObjectiveBreakdown parts_end;
  double grad_norm_end = 0.0;
  double dist_w_anchor = 0.0;
  /// The remaining diagnostics compare the phase-end state to the masked
  /// reference solve on the anchor's shape; only filled when the anchor
  /// passes validate_fs.
  bool anchor_shape_diag = false;
  double interior_gap_l2 = 0.0;  ///< L2 gap on the deep interior of the anchor shape
  double exterior_mass = 0.0;    ///< integral of y^2 outside the anchor shape closure
  double shape_gain_vs_anchor = 0.0;
  double shape_loss_vs_anchor = 0.0;
};

struct ContinuationResult {
  Field g;
  std::vector<PhaseRecord> phases;
  std::vector<IterRecord> trace;
  bool aborted = false;
  std::string abort_reason;
  bool certified = false;
  std::optional<FsProjection> projection;
  std::optional<ShapeMask> shape;
  std::optional<StateSolve> masked_state;
  double j_sharp = 0.0;
};

/// Warm-started descent over the geometric smoothing schedule, followed by
/// projection of the final control to an admissible shape function and a
/// masked reference solve on the extracted shape. A phase or certification
/// failure stops the run and returns the partial trace with aborted set.
ContinuationResult continuation(const ProblemData& data, Field g_init,
                                const OptimizerConfig& cfg, std::mt19937_64& rng);

}  // namespace shapeopt
