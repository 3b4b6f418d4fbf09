#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace shapeopt {

/// Invalid or inconsistent run configuration (CLI exit code 2).
struct config_error : std::runtime_error {
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure: non-convergence, NaN contamination (CLI exit code 3).
struct solver_error : std::runtime_error {
  explicit solver_error(const std::string& what) : std::runtime_error(what) {}
  solver_error(const std::string& what, std::vector<double> history)
      : std::runtime_error(what), residual_history(std::move(history)) {}
  std::vector<double> residual_history;
};

}  // namespace shapeopt
