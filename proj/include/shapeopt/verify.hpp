#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace shapeopt {

struct CheckResult {
  std::string name;
  bool pass = false;
  double seconds = 0.0;
  std::string detail;
};

struct VerifyOptions {
  std::uint64_t seed = 1;
  /// Negative-control hook: corrupts the smoothed step function inside the
  /// smoothing suite, which must then fail.
  bool break_heps = false;
  /// Nodes per axis for the end-to-end recovery run.
  int recovery_grid_n = 97;
};

/// Each check is self-contained, deterministic given the seed, and reports
/// pass/fail with a one-line numeric summary. Exceptions inside a check are
/// converted into a failing result.
CheckResult check_heaviside(const VerifyOptions& opts);
CheckResult check_mesh_convergence(const VerifyOptions& opts);
CheckResult check_penalization_limit(const VerifyOptions& opts);
CheckResult check_comparison_principles(const VerifyOptions& opts);
CheckResult check_density_pipeline(const VerifyOptions& opts);
CheckResult check_gradient(const VerifyOptions& opts);
CheckResult check_level_band_shrinkage(const VerifyOptions& opts);
CheckResult check_shape_recovery(const VerifyOptions& opts);
CheckResult check_reparametrization_invariance(const VerifyOptions& opts);

/// All checks in reporting order.
std::vector<CheckResult> run_all_checks(const VerifyOptions& opts);

}  // namespace shapeopt
