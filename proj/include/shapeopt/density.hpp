#pragma once

#include <random>

#include "shapeopt/grid.hpp"
#include "shapeopt/shapes.hpp"

namespace shapeopt {

/// Stage one: force g <= 0 on the 1/m neighborhood of E, then smooth with a
/// compact product kernel of radius 1/m (boundary values replicated). The
/// output is <= 0 on every E node. Requires 1/m < gap(E, boundary of D).
Field clamp_and_mollify(const Field& g, int m);

/// Stage two: add a collar of height -2 min(min_bd g, 0) + 1/m on the outer
/// boundary, ramping to zero at distance 1/m. Afterwards g > 0 on every
/// boundary node; values on E are untouched.
Field boundary_lift(const Field& g, int m);

struct SardShiftResult {
  Field g;
  double delta = 0.0;
  int retries = 0;
};

/// Stage three: pick a level shift delta in (0, min(delta_cap, 1/m)) whose
/// level set is transversal, subtract it, and add a small bump vanishing on
/// the shifted sublevel set so the result passes validate_fs. Requires
/// g <= 0 on E and g > 0 on the outer boundary. Throws solver_error when no
/// admissible shift is found.
SardShiftResult sard_shift(const Field& g, int m, double delta_cap,
                           std::mt19937_64& rng);

struct FsProjection {
  Field g;
  FsReport report;
  double error_l2 = 0.0;
  int final_m = 0;
  double delta = 0.0;
};

/// Runs the three stages for m = m_start, 2 m_start, ... until the L2
/// distance to the input drops below target_error, chaining the level shifts
/// downward. Returns the best admissible attempt when the target is out of
/// reach; throws solver_error when no attempt validates.
FsProjection project_to_fs(const Field& g, double target_error,
                           std::mt19937_64& rng, int m_start = 4);

}  // namespace shapeopt
