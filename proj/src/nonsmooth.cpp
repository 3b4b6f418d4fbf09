#include "shapeopt/nonsmooth.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "shapeopt/errors.hpp"

namespace shapeopt {

NonsmoothMap::NonsmoothMap(std::string name, std::vector<double> breakpoints,
                           std::vector<double> slopes, double value_at_zero)
    : name_(std::move(name)),
      breakpoints_(std::move(breakpoints)),
      slopes_(std::move(slopes)),
      value_at_zero_(value_at_zero) {
  if (slopes_.size() != breakpoints_.size() + 1)
    throw std::invalid_argument("NonsmoothMap: need one slope per piece");
  for (std::size_t k = 0; k + 1 < breakpoints_.size(); ++k)
    if (!(breakpoints_[k] < breakpoints_[k + 1]))
      throw std::invalid_argument("NonsmoothMap: breakpoints must increase strictly");
  for (double b : breakpoints_)
    if (!std::isfinite(b)) throw std::invalid_argument("NonsmoothMap: non-finite breakpoint");
  for (double s : slopes_) {
    if (!std::isfinite(s)) throw std::invalid_argument("NonsmoothMap: non-finite slope");
    if (s < 0.0) monotone_ = false;
  }
  if (!std::isfinite(value_at_zero_))
    throw std::invalid_argument("NonsmoothMap: non-finite value at zero");
}

NonsmoothMap NonsmoothMap::max0() { return NonsmoothMap("max0", {0.0}, {0.0, 1.0}, 0.0); }

NonsmoothMap NonsmoothMap::abs_shifted(double shift) {
  return NonsmoothMap("abs_shifted", {shift}, {-1.0, 1.0}, std::abs(shift));
}

NonsmoothMap NonsmoothMap::piecewise_linear(std::vector<double> breakpoints,
                                            std::vector<double> slopes,
                                            double value_at_zero) {
  for (double s : slopes)
    if (s < 0.0)
      throw std::invalid_argument("piecewise_linear: slopes must be nonnegative");
  return NonsmoothMap("piecewise_linear", std::move(breakpoints), std::move(slopes),
                      value_at_zero);
}

NonsmoothMap NonsmoothMap::smooth_reference(double c) {
  if (c < 0.0) throw std::invalid_argument("smooth_reference: c must be >= 0");
  return NonsmoothMap("smooth_reference", {}, {c}, 0.0);
}

double NonsmoothMap::operator()(double v) const {
  const double lo = std::min(0.0, v), hi = std::max(0.0, v);
  double acc = 0.0;
  double prev = lo;
  for (std::size_t k = 0; k < breakpoints_.size(); ++k) {
    const double b = breakpoints_[k];
    if (b <= lo) continue;
    if (b >= hi) break;
    acc += slopes_[k] * (b - prev);
    prev = b;
  }
  // slope on the final stretch: piece containing the midpoint
  const double mid = 0.5 * (prev + hi);
  std::size_t idx = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), mid) -
                    breakpoints_.begin();
  if (hi > prev) acc += slopes_[idx] * (hi - prev);
  return value_at_zero_ + (v >= 0.0 ? acc : -acc);
}

double NonsmoothMap::subderivative(double v) const {
  const std::size_t idx =
      std::upper_bound(breakpoints_.begin(), breakpoints_.end(), v) - breakpoints_.begin();
  return slopes_[idx];
}

double NonsmoothMap::lipschitz_constant(double M) const {
  if (M < 0.0) throw std::invalid_argument("lipschitz_constant: M must be >= 0");
  double best = 0.0;
  for (std::size_t k = 0; k < slopes_.size(); ++k) {
    const double lo = k == 0 ? -std::numeric_limits<double>::infinity() : breakpoints_[k - 1];
    const double hi = k == slopes_.size() - 1 ? std::numeric_limits<double>::infinity()
                                              : breakpoints_[k];
    if (lo <= M && hi >= -M) best = std::max(best, std::abs(slopes_[k]));
  }
  return best;
}

Field NonsmoothMap::apply(const Field& f) const {
  return shapeopt::apply(f, [this](double v) { return (*this)(v); });
}

Field NonsmoothMap::subderivative(const Field& f) const {
  return shapeopt::apply(f, [this](double v) { return subderivative(v); });
}

namespace {

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    out.push_back(std::stod(item));
  return out;
}

}  // namespace

NonsmoothMap NonsmoothMap::parse(const std::string& text) {
  if (text == "max0") return max0();
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string args = colon == std::string::npos ? "" : text.substr(colon + 1);
  try {
    if (kind == "abs") return abs_shifted(args.empty() ? 0.0 : std::stod(args));
    if (kind == "smooth") return smooth_reference(args.empty() ? 1.0 : std::stod(args));
    if (kind == "pwl") {
      const auto semi = args.find(';');
      if (semi == std::string::npos)
        throw config_error("pwl spec needs 'breakpoints;slopes'");
      std::vector<double> b = parse_list(args.substr(0, semi));
      std::vector<double> s = parse_list(args.substr(semi + 1));
      return piecewise_linear(std::move(b), std::move(s));
    }
  } catch (const std::invalid_argument& e) {
    throw config_error(std::string("invalid nonsmooth map '") + text + "': " + e.what());
  }
  throw config_error("unknown nonsmooth map kind: " + text);
}

}  // namespace shapeopt
