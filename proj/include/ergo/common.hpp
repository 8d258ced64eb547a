#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace ergo {

inline constexpr double pi = 3.14159265358979323846;

struct invalid_input : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// raised when a system does not satisfy a hypothesis an operation depends on
struct hypothesis_violation : std::runtime_error {
  std::string condition;
  hypothesis_violation(std::string cond, const std::string& what)
      : std::runtime_error(cond + ": " + what), condition(std::move(cond)) {}
};

struct numerical_failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline double wrap01(double x) {
  double r = x - std::floor(x);
  return r >= 1.0 ? 0.0 : r;
}

inline double base_distance(double x, double y, bool circle) {
  double d = std::fabs(x - y);
  if (circle) d = std::fmin(d, 1.0 - d);
  return d;
}

}  // namespace ergo
