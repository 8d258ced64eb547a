#include "ergo/potential.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "ergo/common.hpp"
#include "ergo/parallel.hpp"

namespace ergo {

double estimate_holder_constant(const RealFn& g, double zeta, int grid_size, bool circle) {
  if (grid_size < 8) throw invalid_input("estimate_holder_constant: grid_size < 8");
  const int n = grid_size - 1;
  std::vector<double> x(n), v(n);
  for (int k = 0; k < n; ++k) {
    x[k] = static_cast<double>(k + 1) / grid_size;
    v[k] = g(x[k]);
  }
  std::vector<double> rowmax(n, 0.0);
  parallel_for(n, [&](std::size_t i) {
    double m = 0.0;
    for (int j = static_cast<int>(i) + 1; j < n; ++j) {
      double d = base_distance(x[i], x[j], circle);
      double r = std::fabs(v[i] - v[j]) / std::pow(d, zeta);
      m = std::max(m, r);
    }
    rowmax[i] = m;
  });
  return *std::max_element(rowmax.begin(), rowmax.end());
}

double estimate_holder_constant(const HolderPotential& phi, int grid_size) {
  return estimate_holder_constant(phi.eval, phi.zeta, grid_size, phi.circle);
}

HolderPotential make_potential(std::string name, RealFn eval, double zeta, double epsilon_phi, bool circle,
                               int grid_size) {
  if (!(zeta > 0.0 && zeta <= 1.0)) throw invalid_input("potential: zeta must lie in (0,1]");
  HolderPotential p;
  p.name = std::move(name);
  p.eval = std::move(eval);
  p.zeta = zeta;
  p.epsilon_phi = epsilon_phi;
  p.circle = circle;
  p.sup_val = -INFINITY;
  p.inf_val = INFINITY;
  for (int k = 0; k < grid_size; ++k) {
    double v = p.eval((k + 0.5) / grid_size);
    if (!std::isfinite(v)) throw invalid_input("potential: non-finite value");
    p.sup_val = std::max(p.sup_val, v);
    p.inf_val = std::min(p.inf_val, v);
  }
  p.holder_constant_estimate = estimate_holder_constant(p, grid_size);
  return p;
}

HolderPotential constant_potential(double c, double zeta, double epsilon_phi, bool circle) {
  HolderPotential p;
  p.name = "constant";
  p.eval = [c](double) { return c; };
  p.zeta = zeta;
  p.epsilon_phi = epsilon_phi;
  p.circle = circle;
  p.sup_val = p.inf_val = c;
  p.is_constant = true;
  return p;
}

MembershipReport check_PM_membership(const HolderPotential& phi, int grid_size) {
  MembershipReport r;
  r.oscillation = phi.sup_val - phi.inf_val;
  r.f31 = r.oscillation < phi.epsilon_phi;
  auto e = [&](double x) { return std::exp(phi.eval(x)); };
  r.exp_holder = phi.is_constant ? 0.0 : estimate_holder_constant(e, phi.zeta, grid_size, phi.circle);
  r.f32_rhs = phi.epsilon_phi * std::exp(phi.inf_val);
  r.f32 = r.exp_holder < r.f32_rhs;
  return r;
}

double gap_condition_value(int deg, int q, double sigma, double L, double zeta, double epsilon_phi,
                           std::optional<double> exponent) {
  if (q < 0) throw invalid_input("gap_condition_value: q < 0");
  if (q >= deg) throw hypothesis_violation("(f2)", "q >= deg(f): every branch meets the region A");
  if (!(sigma > 1.0)) throw invalid_input("gap_condition_value: sigma must exceed 1");
  if (!(L >= 1.0)) throw invalid_input("gap_condition_value: L must be >= 1");
  if (!(zeta > 0.0 && zeta <= 1.0)) throw invalid_input("gap_condition_value: zeta must lie in (0,1]");
  double e = exponent.value_or(zeta);
  double s = (deg - q) * std::pow(sigma, -e) + q * std::pow(L, e) * (1.0 + std::pow(L - 1.0, e));
  return std::exp(epsilon_phi) * s / deg;
}

HolderPotential geometric_potential(const IntervalMap& f, double t, double zeta, double epsilon_phi) {
  bool constant = true;
  double d0 = f.branches.front().derivative(0.5 * (f.branches.front().a + f.branches.front().b));
  for (auto& br : f.branches) {
    if (!br.derivative) throw invalid_input("geometric_potential: branch without derivative");
    for (int k = 0; k < 16; ++k) {
      double x = br.a + (br.b - br.a) * (k + 0.5) / 16;
      if (std::fabs(std::fabs(br.derivative(x)) - std::fabs(d0)) > 0.0) constant = false;
    }
  }
  if (constant) {
    auto p = constant_potential(-t * std::log(std::fabs(d0)), zeta, epsilon_phi, f.circle);
    p.name = "geometric";
    return p;
  }
  auto owned = std::make_shared<IntervalMap>(f);
  auto fn2 = [owned, t](double x) {
    double d = std::fabs(owned->branches[owned->branch_of(x)].derivative(x));
    if (d == 0.0) throw invalid_input("geometric_potential: vanishing derivative");
    return -t * std::log(d);
  };
  return make_potential("geometric", fn2, zeta, epsilon_phi, f.circle);
}

HolderPotential reduce_fiber_potential(const FiberFn& G, const FiberFn& phibar, double y0, double zeta,
                                       double epsilon_phi, bool circle, int grid_size) {
  for (int k = 0; k < grid_size; ++k) {
    double x = (k + 0.5) / grid_size;
    if (std::fabs(G(x, y0) - y0) > 1e-9)
      throw hypothesis_violation("class S", "G(x, y0) != y0 at x = " + std::to_string(x));
  }
  auto p = make_potential("reduced", [phibar, y0](double x) { return phibar(x, y0); }, zeta, epsilon_phi, circle,
                          grid_size);
  return p;
}

ExpansionReport check_expansion_condition(const FiberFn& dgdx, const FiberFn& dgdy, int samples) {
  ExpansionReport r;
  r.min_margin = INFINITY;
  for (int i = 0; i < samples; ++i)
    for (int j = 0; j < samples; ++j) {
      double x = (i + 0.5) / samples, y = (j + 0.5) / samples;
      double m = std::fabs(dgdy(x, y)) - 1.0 - std::fabs(dgdx(x, y)) / 3.0;
      r.min_margin = std::min(r.min_margin, m);
    }
  r.pass = r.min_margin > 0.0;
  return r;
}

}  // namespace ergo
