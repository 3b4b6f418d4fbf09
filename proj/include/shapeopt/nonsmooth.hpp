#pragma once

#include <string>
#include <vector>

#include "shapeopt/grid.hpp"

namespace shapeopt {

/// Scalar continuous piecewise-linear map applied pointwise in the state
/// equation. Subderivatives pick the right-hand slope at a kink, which lies
/// inside the generalized differential.
///
/// All factory kinds except abs_shifted are monotone increasing; abs_shifted
/// mirrors the classical |.| example and is excluded from monotone-only
/// comparison arguments (see monotone()).
class NonsmoothMap {
 public:
  /// v -> max(v, 0)
  static NonsmoothMap max0();
  /// v -> |v - shift|
  static NonsmoothMap abs_shifted(double shift);
  /// Continuous piecewise-linear map with value_at_zero at v = 0; breakpoints
  /// strictly increasing, slopes.size() == breakpoints.size() + 1, all >= 0.
  static NonsmoothMap piecewise_linear(std::vector<double> breakpoints,
                                       std::vector<double> slopes,
                                       double value_at_zero = 0.0);
  /// v -> c * v with c >= 0; smooth reference for derivative checks.
  static NonsmoothMap smooth_reference(double c);

  /// Parses "max0", "abs:SHIFT", "smooth:C", "pwl:b1,b2,..;s0,s1,..".
  static NonsmoothMap parse(const std::string& text);

  double operator()(double v) const;
  double subderivative(double v) const;
  /// Upper bound on the local Lipschitz constant over [-M, M]: the largest
  /// |slope| among pieces intersecting the interval.
  double lipschitz_constant(double M) const;
  double value_at_zero() const { return value_at_zero_; }
  bool monotone() const { return monotone_; }
  const std::string& name() const { return name_; }

  Field apply(const Field& f) const;
  Field subderivative(const Field& f) const;

 private:
  NonsmoothMap(std::string name, std::vector<double> breakpoints,
               std::vector<double> slopes, double value_at_zero);

  std::string name_;
  std::vector<double> breakpoints_;  // strictly increasing, may be empty
  std::vector<double> slopes_;       // breakpoints_.size() + 1 entries
  double value_at_zero_ = 0.0;
  bool monotone_ = true;
};

}  // namespace shapeopt
