#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ergo {

using RealFn = std::function<double(double)>;

struct Branch {
  double a = 0.0, b = 1.0;
  // on the circle this is a lift: its image of [a, b] has length 1
  RealFn forward;
  // empty means bisection on [a, b]
  RealFn inverse;
  RealFn derivative;
  // local Lipschitz constant of the inverse branch near x, x in [a, b]
  RealFn lip;
};

struct IntervalMap {
  std::string name;
  std::vector<Branch> branches;
  bool circle = false;
  std::optional<std::pair<double, double>> neutral;  // the region A
  double sigma = 2.0;
  double L_max = 1.0;
  // boundary points belong to the branch on their left instead of the right
  bool right_closed = false;

  int degree() const { return static_cast<int>(branches.size()); }
  int branch_of(double x) const;
  bool in_neutral(double x) const;
};

double eval(const IntervalMap& f, double x);
double branch_inverse(const IntervalMap& f, int b, double y);
std::vector<double> inverse_branches(const IntervalMap& f, double y);

struct StructureReport {
  bool f1 = true;
  bool p2 = true;
  bool surjective = true;
  bool roundtrip = true;
  int q = 0;
  double f1_margin = 0.0;  // min over samples of (bound - L(x))
  double roundtrip_error = 0.0;
  std::vector<std::string> notes;
  bool all() const { return f1 && p2 && surjective && roundtrip; }
};

StructureReport check_structure(const IntervalMap& f, int sample_count);

IntervalMap l_adic(int l, bool circle = false, double shift = 0.0);
IntervalMap doubling(bool circle = false);
IntervalMap manneville_pomeau(double alpha, double neutral_width = 0.05);
IntervalMap piecewise_affine(const std::vector<double>& slopes, const std::vector<double>& breakpoints);

}  // namespace ergo
