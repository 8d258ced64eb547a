#include "ergo/stability.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ergo/common.hpp"

namespace ergo {

namespace {

double jac_reciprocal(const SkewSystem& s, double y, int i) {
  return interp_eval(s.spec.h, y, s.base.circle) * std::exp(s.potential.eval(y)) / (s.spec.lambda * s.spec.h[i]);
}

}  // namespace

AdmissibilityReport check_admissibility(const SkewSystem& s0, const SkewSystem& sd, double delta, double R,
                                        int fiber_grid) {
  AdmissibilityReport r;
  r.delta = delta;
  r.R = R;
  r.u1 = s0.base.degree() == sd.base.degree();
  if (!r.u1) return r;
  if (s0.N != sd.N) throw invalid_input("check_admissibility: grids differ");
  const int N = s0.N, deg = s0.base.degree();
  const bool circle = s0.base.circle;
  for (int i = 0; i < N; ++i) {
    double x = cell_center(i, N);
    std::vector<double> p0(deg), pd(deg);
    for (int b = 0; b < deg; ++b) {
      p0[b] = branch_inverse(s0.base, b, x);
      pd[b] = branch_inverse(sd.base, b, x);
    }
    // pair preimages: by branch on the interval, by the best cyclic matching of sorted preimages on the circle
    std::vector<int> match(deg);
    std::iota(match.begin(), match.end(), 0);
    double disp = 0.0;
    for (int b = 0; b < deg; ++b) disp = std::max(disp, base_distance(p0[b], pd[b], circle));
    if (circle) {
      std::vector<int> o0(deg), od(deg);
      std::iota(o0.begin(), o0.end(), 0);
      std::iota(od.begin(), od.end(), 0);
      std::sort(o0.begin(), o0.end(), [&](int a, int b) { return p0[a] < p0[b]; });
      std::sort(od.begin(), od.end(), [&](int a, int b) { return pd[a] < pd[b]; });
      for (int sh = 0; sh < deg; ++sh) {
        double m = 0.0;
        for (int k = 0; k < deg; ++k) m = std::max(m, base_distance(p0[o0[k]], pd[od[(k + sh) % deg]], true));
        if (m < disp) {
          disp = m;
          for (int k = 0; k < deg; ++k) match[o0[k]] = od[(k + sh) % deg];
        }
      }
    }
    r.preimage_displacement = std::max(r.preimage_displacement, disp);
    double jsum = 0.0;
    for (int b = 0; b < deg; ++b) jsum += std::fabs(jac_reciprocal(sd, pd[match[b]], i) - jac_reciprocal(s0, p0[b], i));
    r.jacobian_difference = std::max(r.jacobian_difference, jsum);
    for (int k = 0; k < fiber_grid; ++k) {
      double y = (k + 0.5) / fiber_grid;
      r.fiber_displacement = std::max(r.fiber_displacement, std::fabs(s0.G_at(x, y) - sd.G_at(x, y)));
    }
    r.density_ratio = std::max(r.density_ratio, sd.spec.m[i] / s0.spec.m[i]);
  }
  r.spectral_slack = deg * (s0.spec.residual_h + sd.spec.residual_h) + 1e-12;
  r.u22 = r.preimage_displacement <= R + 1e-12;
  r.u23 = r.fiber_displacement <= R + 1e-9;
  r.u21 = r.jacobian_difference <= R + r.spectral_slack;
  return r;
}

AdmissibilityReport check_admissibility(const PerturbationFamily& fam, double delta) {
  SkewSystem s0 = fam.generator(0.0), sd = fam.generator(delta);
  return check_admissibility(s0, sd, delta, fam.R(delta));
}

StabilityCurve stability_curve(const PerturbationFamily& fam, const CurveOptions& opt) {
  StabilityCurve c;
  std::vector<double> deltas = fam.deltas;
  std::sort(deltas.begin(), deltas.end(), std::greater<>());
  SkewSystem s0 = fam.generator(0.0);
  if (s0.beta() >= 1.0) throw hypothesis_violation("(alpha L)^zeta < 1", "unperturbed system");
  auto e0 = equilibrium(s0, opt.m2, opt.tol, opt.n_max);
  if (!e0.converged) throw numerical_failure("stability_curve: unperturbed equilibrium did not converge");
  c.base_family = e0.family;
  const double zeta = s0.zeta;
  for (double d : deltas) {
    SkewSystem sd = fam.generator(d);
    if (sd.beta() >= 1.0)
      throw hypothesis_violation("(alpha L)^zeta < 1", "perturbed system at delta = " + std::to_string(d));
    auto ed = equilibrium(sd, opt.m2, opt.tol, opt.n_max);
    if (!ed.converged) throw numerical_failure("stability_curve: equilibrium did not converge at delta = " + std::to_string(d));
    CurveRow row;
    row.delta = d;
    row.R = fam.R(d);
    row.distance = family_distance_linf(ed.family, e0.family, zeta);
    row.iterations = ed.iterations;
    double scale = std::pow(row.R, zeta) * std::fabs(std::log(d));
    row.c_candidate = scale > 0 ? row.distance / scale : (row.distance > 0 ? INFINITY : 0.0);
    c.rows.push_back(row);
    c.families.push_back(std::move(ed.family));
    c.systems.push_back(std::move(sd));
  }
  for (auto& r : c.rows) c.C_hat = std::max(c.C_hat, r.c_candidate);
  for (auto& r : c.rows) r.envelope = c.C_hat * std::pow(r.R, zeta) * std::fabs(std::log(r.delta));
  c.finite = std::isfinite(c.C_hat);
  c.monotone = true;
  for (std::size_t k = 1; k < c.rows.size(); ++k)
    if (c.rows[k].distance > 1.1 * c.rows[k - 1].distance + 1e-15) c.monotone = false;
  if (c.rows.size() >= 2) {
    double a = c.rows[c.rows.size() - 2].c_candidate, b = c.rows.back().c_candidate;
    c.last_ratio = (a == 0.0 && b == 0.0) ? 1.0 : b / a;
  }
  c.ratio_ok = c.last_ratio >= 0.2 && c.last_ratio <= 5.0;
  c.pass = c.finite && c.monotone && c.ratio_ok;
  return c;
}

UniformReport uniform_constants_probe(const StabilityCurve& curve, std::uint64_t seed) {
  UniformReport u;
  for (std::size_t k = 0; k < curve.rows.size(); ++k) {
    const SkewSystem& s = curve.systems[k];
    UniformRow row;
    row.delta = curve.rows[k].delta;
    row.beta = s.beta();
    row.D2 = (s.potential.epsilon_phi + s.fiber.G_holder) * std::pow(s.base.L_max, s.zeta);
    row.holder = holder_seminorm(curve.families[k], s.zeta);
    auto ly = lasota_yorke_probe(s.spec, s.op.A, 10, 8, s.zeta, seed);
    row.r_hat = ly.r_hat;
    row.ly_C = ly.C;
    u.max_beta = std::max(u.max_beta, row.beta);
    u.sup_D2 = std::max(u.sup_D2, row.D2);
    u.sup_holder = std::max(u.sup_holder, row.holder);
    u.slack = std::max(u.slack, 2.0 * std::pow(0.5 / s.bins, s.zeta) * std::pow(static_cast<double>(s.N), s.zeta));
    u.rows.push_back(row);
  }
  u.B_u = u.max_beta < 1.0 ? u.sup_D2 / (1.0 - u.max_beta) : INFINITY;
  u.pass = u.max_beta < 1.0 && u.sup_holder <= u.B_u + u.slack;
  return u;
}

PerturbationFamily fiber_shift_family(std::function<SkewSystem(const FiberMap&)> build, FiberMap g0,
                                      std::vector<double> deltas) {
  PerturbationFamily f;
  f.kind = "fiber-shift";
  f.deltas = std::move(deltas);
  f.R = [](double d) { return d; };
  f.generator = [build, g0](double d) {
    if (d == 0.0) return build(g0);
    FiberMap g = g0;
    g.name = g0.name + "+shift";
    for (auto& G : g.G) {
      FiberFn base = G;
      G = [base, d](double x, double y) {
        double s = 0.5 * (1.0 + std::sin(2.0 * pi * x));
        return std::clamp(base(x, y) + d * s, 0.0, 1.0);
      };
    }
    // |s|_zeta <= pi^zeta for s = (1 + sin 2 pi x) / 2; bound evaluated at zeta = 1
    g.G_holder = g0.G_holder + d * pi;
    return build(g);
  };
  return f;
}

PerturbationFamily base_shift_family(std::function<SkewSystem(const IntervalMap&)> build, int l,
                                     std::vector<double> deltas) {
  PerturbationFamily f;
  f.kind = "base-shift";
  f.deltas = std::move(deltas);
  f.R = [](double d) { return d; };
  f.generator = [build, l](double d) { return build(l_adic(l, true, d)); };
  return f;
}

PerturbationFamily coefficient_family(std::function<SkewSystem(const FiberMap&)> build, std::vector<double> alphas,
                                      std::vector<double> offsets, std::vector<double> slopes,
                                      std::vector<double> deltas) {
  if (slopes.size() != alphas.size()) throw invalid_input("coefficient family: slopes size mismatch");
  PerturbationFamily f;
  f.kind = "coefficient";
  f.deltas = std::move(deltas);
  double cmax = 0.0;
  for (double s : slopes) cmax = std::max(cmax, std::fabs(s));
  f.R = [cmax](double d) { return cmax * d; };
  f.generator = [build, alphas, offsets, slopes](double d) {
    std::vector<double> a = alphas;
    for (std::size_t k = 0; k < a.size(); ++k) a[k] += d * slopes[k];
    return build(coefficient_fiber(a, offsets));
  };
  return f;
}

PerturbationFamily constant_family(std::function<SkewSystem()> build, std::vector<double> deltas) {
  PerturbationFamily f;
  f.kind = "constant";
  f.deltas = std::move(deltas);
  f.R = [](double d) { return d; };
  f.generator = [build](double) { return build(); };
  return f;
}

}  // namespace ergo
