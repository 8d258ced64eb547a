#include "ergo/base_map.hpp"

#include <algorithm>
#include <cmath>

#include "ergo/common.hpp"

namespace ergo {

int IntervalMap::branch_of(double x) const {
  int n = degree();
  for (int i = 0; i < n - 1; ++i)
    if (right_closed ? x <= branches[i].b : x < branches[i].b) return i;
  return n - 1;
}

bool IntervalMap::in_neutral(double x) const {
  return neutral && x >= neutral->first && x <= neutral->second;
}

double eval(const IntervalMap& f, double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw invalid_input("eval: x outside [0,1]");
  double y = f.branches[f.branch_of(x)].forward(x);
  return f.circle ? wrap01(y) : std::clamp(y, 0.0, 1.0);
}

namespace {

double bisect(const Branch& br, double y, bool circle) {
  double lo = br.a, hi = br.b;
  double flo = br.forward(lo), fhi = br.forward(hi);
  if (circle) {
    // lift y into the branch image
    double base = std::min(flo, fhi);
    y = base + wrap01(y - base);
  }
  bool inc = fhi >= flo;
  double mn = std::min(flo, fhi), mx = std::max(flo, fhi);
  if (y < mn - 1e-9 || y > mx + 1e-9) throw numerical_failure("bisection: target outside branch image");
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    double fm = br.forward(mid);
    if ((fm < y) == inc) lo = mid; else hi = mid;
    if (hi - lo < 1e-12) return 0.5 * (lo + hi);
  }
  throw numerical_failure("bisection: iteration cap reached");
}

}  // namespace

double branch_inverse(const IntervalMap& f, int b, double y) {
  const Branch& br = f.branches[b];
  if (br.inverse) return br.inverse(y);
  return bisect(br, y, f.circle);
}

std::vector<double> inverse_branches(const IntervalMap& f, double y) {
  if (!(y >= 0.0 && y <= 1.0)) throw invalid_input("inverse_branches: y outside [0,1]");
  std::vector<double> out(f.branches.size());
  for (int b = 0; b < f.degree(); ++b) out[b] = branch_inverse(f, b, y);
  return out;
}

StructureReport check_structure(const IntervalMap& f, int sample_count) {
  StructureReport r;
  if (sample_count < 2 * f.degree()) throw invalid_input("check_structure: sample_count < 2*degree");
  const double tol = 1e-9;
  // branch partition
  std::vector<const Branch*> sorted;
  for (auto& br : f.branches) sorted.push_back(&br);
  std::sort(sorted.begin(), sorted.end(), [](auto* p, auto* q) { return p->a < q->a; });
  if (std::fabs(sorted.front()->a) > 1e-12 || std::fabs(sorted.back()->b - 1.0) > 1e-12) {
    r.p2 = false;
    r.notes.push_back("branch domains do not cover [0,1]");
  }
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i)
    if (std::fabs(sorted[i]->b - sorted[i + 1]->a) > 1e-12) {
      r.p2 = false;
      r.notes.push_back("branch domains leave a gap or overlap");
    }
  int per = std::max(2, sample_count / f.degree());
  r.f1_margin = INFINITY;
  for (int bi = 0; bi < f.degree(); ++bi) {
    const Branch& br = f.branches[bi];
    double fa = br.forward(br.a), fb = br.forward(br.b);
    if (f.circle) {
      if (std::fabs(std::fabs(fb - fa) - 1.0) > tol) r.surjective = false;
    } else {
      bool ends = (std::fabs(fa) <= tol && std::fabs(fb - 1.0) <= tol) ||
                  (std::fabs(fa - 1.0) <= tol && std::fabs(fb) <= tol);
      if (!ends) r.surjective = false;
    }
    // strict monotonicity on samples (injectivity)
    double prev = fa;
    double sgn = fb >= fa ? 1.0 : -1.0;
    for (int k = 1; k <= per; ++k) {
      double x = br.a + (br.b - br.a) * k / per;
      double v = br.forward(x);
      if (sgn * (v - prev) <= 0.0) r.p2 = false;
      prev = v;
    }
    bool hits = false;
    for (int k = 0; k < per; ++k) {
      double x = br.a + (br.b - br.a) * (k + 0.5) / per;
      double L = br.lip(x);
      if (f.in_neutral(x)) {
        hits = true;
        r.f1_margin = std::min(r.f1_margin, f.L_max - L);
        if (L > f.L_max + 1e-12) r.f1 = false;
      } else {
        r.f1_margin = std::min(r.f1_margin, 1.0 / f.sigma - L);
        if (!(L < 1.0 / f.sigma)) r.f1 = false;
      }
    }
    if (f.neutral && !hits) {
      double lo = std::max(br.a, f.neutral->first), hi = std::min(br.b, f.neutral->second);
      hits = lo <= hi && (hi > lo || (lo > br.a && lo < br.b));
    }
    if (hits) ++r.q;
    if (!r.surjective) continue;
    for (int k = 0; k < per; ++k) {
      double y = (k + 0.5) / per;
      double x = branch_inverse(f, bi, y);
      double back = br.forward(x);
      double err = f.circle ? base_distance(wrap01(back), y, true) : std::fabs(back - y);
      r.roundtrip_error = std::max(r.roundtrip_error, err);
    }
  }
  if (!r.surjective) r.notes.push_back("a branch is not onto");
  if (r.roundtrip_error > 1e-10) r.roundtrip = false;
  return r;
}

IntervalMap l_adic(int l, bool circle, double shift) {
  if (l < 2) throw invalid_input("l_adic: l must be >= 2");
  if (!(shift >= 0.0 && shift < 1.0)) throw invalid_input("l_adic: shift must lie in [0,1)");
  if (shift != 0.0 && !circle) throw invalid_input("l_adic: a shifted map needs the circle");
  IntervalMap f;
  f.name = shift == 0.0 ? (l == 2 ? "doubling" : "l_adic") : "shifted_l_adic";
  f.circle = circle;
  f.sigma = static_cast<double>(l);
  f.L_max = 1.0;
  const double L = static_cast<double>(l);
  for (int k = 0; k < l; ++k) {
    Branch br;
    br.a = static_cast<double>(k) / L;
    br.b = static_cast<double>(k + 1) / L;
    br.forward = [L, k, shift](double x) { return L * x - k + shift; };
    if (shift == 0.0)
      br.inverse = [L, k](double y) { return (y + k) / L; };
    else
      br.inverse = [L, k, shift](double y) { return (wrap01(y - shift) + k) / L; };
    br.derivative = [L](double) { return L; };
    br.lip = [L](double) { return 1.0 / L; };
    f.branches.push_back(std::move(br));
  }
  // 1/sigma must strictly dominate L(x) off A
  f.sigma = L * (1.0 - 1e-12);
  return f;
}

IntervalMap doubling(bool circle) { return l_adic(2, circle); }

IntervalMap manneville_pomeau(double alpha, double neutral_width) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw invalid_input("manneville_pomeau: alpha must lie in (0,1)");
  if (!(neutral_width > 0.0 && neutral_width < 0.5)) throw invalid_input("manneville_pomeau: bad neutral width");
  IntervalMap f;
  f.name = "manneville_pomeau";
  const double c = std::pow(2.0, alpha);
  Branch b1;
  b1.a = 0.0;
  b1.b = 0.5;
  b1.forward = [alpha, c](double x) { return x * (1.0 + c * std::pow(x, alpha)); };
  b1.derivative = [alpha, c](double x) { return 1.0 + (1.0 + alpha) * c * std::pow(x, alpha); };
  b1.lip = [d = b1.derivative](double x) { return 1.0 / d(x); };
  Branch b2;
  b2.a = 0.5;
  b2.b = 1.0;
  b2.forward = [](double x) { return 2.0 * x - 1.0; };
  b2.inverse = [](double y) { return 0.5 * (y + 1.0); };
  b2.derivative = [](double) { return 2.0; };
  b2.lip = [](double) { return 0.5; };
  double edge = b1.derivative(neutral_width);
  f.branches = {b1, b2};
  f.right_closed = true;
  f.neutral = std::make_pair(0.0, neutral_width);
  f.sigma = std::min(edge, 2.0) * (1.0 - 1e-9);
  f.L_max = 1.0;
  return f;
}

IntervalMap piecewise_affine(const std::vector<double>& slopes, const std::vector<double>& breakpoints) {
  if (breakpoints.size() != slopes.size() + 1 || slopes.empty())
    throw invalid_input("piecewise_affine: need one more breakpoint than slopes");
  if (std::fabs(breakpoints.front()) > 1e-12 || std::fabs(breakpoints.back() - 1.0) > 1e-12)
    throw invalid_input("piecewise_affine: breakpoints must span [0,1]");
  IntervalMap f;
  f.name = "piecewise_affine";
  double smin = INFINITY;
  for (std::size_t i = 0; i < slopes.size(); ++i) {
    double a = breakpoints[i], b = breakpoints[i + 1], s = slopes[i];
    if (!(b > a)) throw invalid_input("piecewise_affine: breakpoints must increase");
    if (std::fabs(std::fabs(s) * (b - a) - 1.0) > 1e-9)
      throw invalid_input("piecewise_affine: slope does not give a full branch");
    Branch br;
    br.a = a;
    br.b = b;
    if (s > 0) {
      br.forward = [a, s](double x) { return (x - a) * s; };
      br.inverse = [a, s](double y) { return a + y / s; };
    } else {
      br.forward = [a, s](double x) { return 1.0 + (x - a) * s; };
      br.inverse = [a, s](double y) { return a + (y - 1.0) / s; };
    }
    br.derivative = [s](double) { return std::fabs(s); };
    br.lip = [s](double) { return 1.0 / std::fabs(s); };
    smin = std::min(smin, std::fabs(s));
    f.branches.push_back(std::move(br));
  }
  if (!(smin > 1.0)) throw invalid_input("piecewise_affine: slopes must exceed 1 in modulus");
  f.sigma = smin * (1.0 - 1e-12);
  return f;
}

}  // namespace ergo
