#include "ergo/skew.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "ergo/common.hpp"
#include "ergo/parallel.hpp"

namespace ergo {

FiberReport check_fiber(const IntervalMap& f, const FiberMap& g, double zeta, int samples) {
  FiberReport r;
  for (int b = 0; b < f.degree(); ++b) {
    const Branch& br = f.branches[b];
    for (int i = 0; i < samples; ++i) {
      double x = br.a + (br.b - br.a) * (i + 0.5) / samples;
      for (int j = 0; j + 1 < samples; ++j) {
        double z1 = (j + 0.5) / samples, z2 = (j + 1.5) / samples;
        double ratio = std::fabs(g.G[b](x, z1) - g.G[b](x, z2)) / (z2 - z1);
        r.max_contraction_ratio = std::max(r.max_contraction_ratio, ratio);
      }
    }
    for (int i = 0; i < samples; ++i)
      for (int k = i + 1; k < samples; ++k) {
        double x1 = br.a + (br.b - br.a) * (i + 0.5) / samples;
        double x2 = br.a + (br.b - br.a) * (k + 0.5) / samples;
        double d = std::pow(base_distance(x1, x2, f.circle), zeta);
        for (int j = 0; j < 8; ++j) {
          double y = (j + 0.5) / 8;
          r.max_holder_ratio = std::max(r.max_holder_ratio, std::fabs(g.G[b](x1, y) - g.G[b](x2, y)) / d);
        }
      }
  }
  r.h1 = r.max_contraction_ratio <= g.alpha + 1e-9;
  r.h2 = r.max_holder_ratio <= g.G_holder + 1e-9;
  return r;
}

double SkewSystem::beta() const { return std::pow(fiber.alpha * base.L_max, zeta); }

SkewSystem make_system(IntervalMap base, FiberMap fiber, HolderPotential potential, double zeta, int N, int bins,
                       int atom_cap, double eig_tol, int eig_max_iter) {
  if (static_cast<int>(fiber.G.size()) != base.degree())
    throw invalid_input("make_system: fiber map needs one component per branch");
  if (bins > atom_cap) throw invalid_input("make_system: fiber bins exceed the atom cap");
  SkewSystem s;
  s.base = std::move(base);
  s.fiber = std::move(fiber);
  s.potential = std::move(potential);
  s.zeta = zeta;
  s.N = N;
  s.bins = bins;
  s.atom_cap = atom_cap;
  s.op = build_operator_matrix(s.base, s.potential, N);
  s.spec = leading_eigendata(s.op.A, s.base.circle, eig_tol, eig_max_iter);
  return s;
}

LeafFamily apply_transfer(const SkewSystem& sys, const LeafFamily& fam) {
  const int N = sys.N;
  if (fam.size() != N) throw invalid_input("apply_transfer: leaf count does not match the grid");
  const int bins = sys.bins;
  const auto& h = sys.spec.h;
  LeafFamily out;
  out.leaves.resize(N);
  out.base_weights = sys.spec.m;
  out.marginal_density.resize(N);
  out.circle = fam.circle;
  parallel_for(N, [&](std::size_t j) {
    std::vector<double> acc(bins, 0.0);
    std::vector<char> hit(bins, 0);
    const double scale = 1.0 / (sys.spec.lambda * h[j]);
    for (int b = 0; b < sys.op.deg; ++b) {
      const Preimage& p = sys.op.at(static_cast<int>(j), b);
      const FiberFn& G = sys.fiber.G[b];
      const int idx[2] = {p.ip.i0, p.ip.i1};
      const double wt[2] = {1.0 - p.ip.w, p.ip.w};
      for (int k = 0; k < 2; ++k) {
        if (wt[k] == 0.0) continue;
        double coef = scale * p.ephi * wt[k] * h[idx[k]];
        const AtomicMeasure& leaf = fam.leaves[idx[k]];
        for (std::size_t a = 0; a < leaf.size(); ++a) {
          double y = G(p.y, leaf.pos[a]);
          if (y < -1e-12 || y > 1.0 + 1e-12) throw invalid_input("apply_transfer: fiber map leaves [0,1]");
          int bi = bin_index(y, bins);
          acc[bi] += coef * leaf.w[a];
          hit[bi] = 1;
        }
      }
    }
    AtomicMeasure m;
    double mass = 0.0;
    for (int k = 0; k < bins; ++k)
      if (hit[k]) {
        m.pos.push_back((k + 0.5) / bins);
        m.w.push_back(acc[k]);
        mass += acc[k];
      }
    out.leaves[j] = std::move(m);
    out.marginal_density[j] = mass;
  });
  return out;
}

EquilibriumResult equilibrium(const SkewSystem& sys, const AtomicMeasure& m2, double tol, int n_max) {
  if (tol <= 0) throw invalid_input("equilibrium: tol must be positive");
  if (std::fabs(m2.total_mass() - 1.0) > 1e-12) throw invalid_input("equilibrium: m2 must be a probability");
  for (double w : m2.w)
    if (w < 0) throw invalid_input("equilibrium: m2 must be a probability");
  EquilibriumResult r;
  LeafFamily fam = product_family(m2, sys.spec.m, sys.base.circle);
  for (int n = 0; n < n_max; ++n) {
    LeafFamily next = apply_transfer(sys, fam);
    double d = family_distance_linf(next, fam, sys.zeta);
    r.trace.push_back(d);
    fam = std::move(next);
    r.iterations = n + 1;
    if (d < tol) {
      r.converged = true;
      break;
    }
  }
  std::size_t take = std::min<std::size_t>(20, r.trace.size());
  std::vector<double> ns, vs;
  for (std::size_t k = r.trace.size() - take; k < r.trace.size(); ++k) {
    ns.push_back(static_cast<double>(k));
    vs.push_back(r.trace[k]);
  }
  r.fit = fit_geometric(ns, vs, 0.0);
  r.family = std::move(fam);
  return r;
}

RegularityReport regularity_check(const SkewSystem& sys, const LeafFamily& fam) {
  RegularityReport r;
  r.beta = sys.beta();
  if (r.beta >= 1.0) throw hypothesis_violation("(alpha L)^zeta < 1", "beta = " + std::to_string(r.beta));
  double L = std::pow(sys.base.L_max, sys.zeta);
  r.D = (sys.potential.epsilon_phi + sys.fiber.G_holder) * L;
  r.bound = r.D / (1.0 - r.beta);
  // coarsening moves each leaf by at most (1/(2 bins))^zeta; adjacent leaves sit 1/N apart
  r.slack = 2.0 * std::pow(0.5 / sys.bins, sys.zeta) * std::pow(static_cast<double>(sys.N), sys.zeta);
  r.H = holder_seminorm(fam, sys.zeta);
  r.pass = r.H <= r.bound + r.slack;
  return r;
}

std::pair<double, double> skew_step(const SkewSystem& sys, double x, double y) {
  int b = sys.base.branch_of(x);
  double y1 = sys.fiber.G[b](x, y);
  return {eval(sys.base, x), y1};
}

Sandwich sandwich_probe(const SkewSystem& sys, const FiberFn& psi, int n, int fiber_grid) {
  const int N = sys.N;
  std::vector<double> lo(N), hi(N);
  parallel_for(N, [&](std::size_t i) {
    double mn = INFINITY, mx = -INFINITY;
    for (int k = 0; k < fiber_grid; ++k) {
      double x = cell_center(static_cast<int>(i), N), y = (k + 0.5) / fiber_grid;
      for (int s = 0; s < n; ++s) std::tie(x, y) = skew_step(sys, x, y);
      double v = psi(x, y);
      mn = std::min(mn, v);
      mx = std::max(mx, v);
    }
    lo[i] = mn;
    hi[i] = mx;
  });
  Sandwich s;
  for (int i = 0; i < N; ++i) {
    s.lower += sys.spec.m[i] * lo[i];
    s.upper += sys.spec.m[i] * hi[i];
  }
  return s;
}

FiberMap solenoid_fiber(int branches, double alpha, double a, double b) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw invalid_input("solenoid: alpha must lie in [0,1)");
  double lo = a - std::fabs(b), hi = alpha + a + std::fabs(b);
  if (lo < -1e-12 || hi > 1.0 + 1e-12) throw invalid_input("solenoid: forcing does not keep the fiber in [0,1]");
  FiberMap g;
  g.name = "solenoid";
  g.alpha = alpha;
  g.G_holder = 2.0 * pi * std::fabs(b);
  for (int k = 0; k < branches; ++k)
    g.G.push_back([alpha, a, b](double x, double y) { return alpha * y + a + b * std::cos(2.0 * pi * x); });
  return g;
}

FiberMap affine_fiber(int branches, double alpha, double c) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw invalid_input("affine fiber: alpha must lie in [0,1)");
  if (c < 0.0 || alpha + c > 1.0 + 1e-12) throw invalid_input("affine fiber: map leaves [0,1]");
  FiberMap g;
  g.name = "affine";
  g.alpha = alpha;
  g.G_holder = 0.0;
  for (int k = 0; k < branches; ++k) g.G.push_back([alpha, c](double, double y) { return alpha * y + c; });
  return g;
}

FiberMap coefficient_fiber(const std::vector<double>& alphas, const std::vector<double>& offsets) {
  if (alphas.size() != offsets.size() || alphas.empty()) throw invalid_input("coefficient fiber: size mismatch");
  FiberMap g;
  g.name = "coefficient";
  g.alpha = 0.0;
  g.G_holder = 0.0;
  for (std::size_t k = 0; k < alphas.size(); ++k) {
    double al = alphas[k], c = offsets[k];
    if (!(al >= 0.0 && al < 1.0) || c < 0.0 || al + c > 1.0 + 1e-12)
      throw invalid_input("coefficient fiber: branch map leaves [0,1] or does not contract");
    g.alpha = std::max(g.alpha, al);
    g.G.push_back([al, c](double, double y) { return al * y + c; });
  }
  return g;
}

FiberMap fixed_fiber(int branches, double y0, double a, double b) {
  double amax = std::fabs(a) + std::fabs(b);
  if (!(amax < 1.0) || a - std::fabs(b) < 0.0) throw invalid_input("fixed fiber: need 0 <= a - |b| and a + |b| < 1");
  FiberMap g;
  g.name = "fixed_fiber";
  g.alpha = amax;
  g.G_holder = 2.0 * pi * std::fabs(b) * std::max(y0, 1.0 - y0);
  for (int k = 0; k < branches; ++k)
    g.G.push_back([y0, a, b](double x, double y) { return y0 + (a + b * std::cos(2.0 * pi * x)) * (y - y0); });
  return g;
}

}  // namespace ergo
