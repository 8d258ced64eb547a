// Acceptance suite: one line per criterion, tolerances pinned below.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "ergo/base_map.hpp"
#include "ergo/common.hpp"
#include "ergo/measure.hpp"
#include "ergo/potential.hpp"
#include "ergo/rng.hpp"
#include "ergo/ruelle.hpp"
#include "ergo/skew.hpp"
#include "ergo/stability.hpp"
#include "ergo/statistics.hpp"

using namespace ergo;

namespace {

struct Gate {
  int id;
  std::string name;
  double limit_s;
  std::function<bool(std::string&)> body;
};

// pinned tolerances
constexpr double kLambdaTol = 1e-10;
constexpr double kEigTol = 1e-8;
constexpr double kNormalizeTol = 1e-8;
constexpr double kOracleTol = 1e-4;
constexpr double kClosedFormTol = 1e-9;
constexpr double kContractionSlack = 1e-9;
constexpr double kFitR2 = 0.95;
constexpr double kMcSigmas = 3.0;
constexpr double kDegenerateSigma = 1e-6;
constexpr double kJitter = 0.10;
constexpr double kCohomologyTol = 1e-9;

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

SkewSystem cosine_solenoid(int N, int bins, double a = 0.25, double b = 0.25) {
  auto base = doubling(true);
  return make_system(base, solenoid_fiber(2, 0.5, a, b), constant_potential(-std::log(2.0), 1.0, 0.05, true), 1.0, N,
                     bins);
}

AtomicMeasure random_measure(Rng& rng, int max_atoms, bool zero_mean) {
  int n = 1 + static_cast<int>(rng.uniform() * max_atoms);
  if (zero_mean && n < 2) n = 2;
  std::vector<std::pair<double, double>> atoms;
  double tot = 0.0;
  for (int k = 0; k < n; ++k) {
    double w = 2.0 * rng.uniform() - 1.0;
    atoms.push_back({rng.uniform(), w});
    tot += w;
  }
  if (zero_mean)
    for (auto& a : atoms) a.second -= tot / n;
  return AtomicMeasure::from_atoms(atoms);
}

bool c1(std::string& d) {
  auto op = build_operator_matrix(doubling(), constant_potential(0.0, 1.0, 0.1), 512);
  auto s = leading_eigendata(op.A, false);
  double he = 0.0, ne = 0.0;
  for (int i = 0; i < s.N; ++i) {
    he = std::max(he, std::fabs(s.h[i] - 1.0));
    ne = std::max(ne, std::fabs(s.nu[i] - 1.0 / s.N));
  }
  d = fmt("lambda-2=%.2e |h-1|=%.2e |nu-1/N|=%.2e", s.lambda - 2.0, he, ne);
  return std::fabs(s.lambda - 2.0) <= kLambdaTol && he <= kEigTol && ne <= kEigTol;
}

bool c2(std::string& d) {
  struct Pair {
    IntervalMap f;
    HolderPotential phi;
  };
  std::vector<Pair> pairs;
  pairs.push_back({doubling(), constant_potential(0.0, 1.0, 0.1)});
  pairs.push_back({doubling(), constant_potential(-std::log(2.0), 1.0, 0.1)});
  pairs.push_back({doubling(true), constant_potential(-std::log(2.0), 1.0, 0.1, true)});
  pairs.push_back({l_adic(3), constant_potential(-std::log(3.0), 1.0, 0.1)});
  {
    auto mp = manneville_pomeau(0.5);
    pairs.push_back({mp, geometric_potential(mp, 0.1, 0.5, 0.3)});
  }
  {
    auto pa = piecewise_affine({3.0, 1.5}, {0.0, 1.0 / 3.0, 1.0});
    pairs.push_back({pa, geometric_potential(pa, 1.0, 1.0, 0.8)});
  }
  pairs.push_back({l_adic(3, true), make_potential("cos", [](double x) { return 0.05 * std::cos(2 * pi * x); }, 1.0,
                                                   0.4, true)});
  double worst = 0.0;
  for (auto& p : pairs) {
    auto op = build_operator_matrix(p.f, p.phi, 512);
    auto s = leading_eigendata(op.A, p.f.circle);
    Vec one = Vec::Ones(512);
    Vec r = normalized_apply(s, op.A, one);
    worst = std::max(worst, (r - one).cwiseAbs().maxCoeff());
  }
  d = fmt("pairs=%.0f max|L1-1|=%.2e", static_cast<double>(pairs.size()), worst);
  return worst <= kNormalizeTol;
}

bool c3(std::string& d) {
  Rng rng(20240607);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    auto mu = random_measure(rng, 10, false);
    double z = (k % 2 == 0) ? 1.0 : 0.5;
    worst = std::max(worst, std::fabs(wk_norm(mu, z) - wk_norm_oracle(mu, z, 64)));
  }
  double closed = 0.0;
  for (int k = 0; k < 50; ++k) {
    double a = rng.uniform(), b = rng.uniform(), w = 4.0 * rng.uniform() - 2.0;
    for (double z : {1.0, 0.5, 0.25}) {
      closed = std::max(closed, std::fabs(wk_norm(AtomicMeasure::from_atoms({{a, w}}), z) - std::fabs(w)));
      auto pair = AtomicMeasure::from_atoms({{a, 1.0}, {b, -1.0}});
      closed = std::max(closed, std::fabs(wk_norm(pair, z) - std::min(2.0, std::pow(std::fabs(a - b), z))));
    }
  }
  d = fmt("max|lp-oracle|=%.2e closed-form err=%.2e", worst, closed);
  return worst <= kOracleTol && closed <= kClosedFormTol;
}

bool c4(std::string& d) {
  Rng rng(99);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    auto mu = random_measure(rng, 10, true);
    double x = rng.uniform(), c = 0.5 * rng.uniform();
    auto img = pushforward([&](double y) { return 0.5 * y + c * (1.0 + std::cos(2 * pi * x)) / 2.0; }, mu);
    double n0 = wk_norm(mu, 1.0);
    if (n0 > 0) worst = std::max(worst, wk_norm(img, 1.0) / n0);
  }
  d = fmt("max ratio=%.12f", worst);
  return worst <= 0.5 + kContractionSlack;
}

bool c5(std::string& d) {
  const int N = 256, bins = 256;
  auto pot = constant_potential(-std::log(2.0), 1.0, 0.05, true);
  auto s1 = make_system(doubling(true), affine_fiber(2, 0.5, 0.2), pot, 1.0, N, bins);
  auto e1 = equilibrium(s1, AtomicMeasure::dirac(0.9));
  double ystar = 0.2 / (1.0 - 0.5), d1 = 0.0;
  auto target1 = AtomicMeasure::dirac(ystar);
  for (auto& leaf : e1.family.leaves) d1 = std::max(d1, wk_norm(leaf - target1, 1.0));
  auto s2 = make_system(doubling(true), solenoid_fiber(2, 0.5, 0.0, 0.0), pot, 1.0, N, bins);
  auto e2 = equilibrium(s2, AtomicMeasure::dirac(0.5));
  double d2 = 0.0;
  auto target2 = AtomicMeasure::dirac(0.0);
  for (auto& leaf : e2.family.leaves) d2 = std::max(d2, wk_norm(leaf - target2, 1.0));
  d = fmt("affine dist=%.2e solenoid0 dist=%.2e bin=%.2e", d1, d2, 1.0 / bins);
  return e1.converged && e2.converged && d1 <= 1.0 / bins + 1e-12 && d2 <= 1.0 / bins + 1e-12;
}

bool c6(std::string& d) {
  auto sys = cosine_solenoid(256, 256);
  auto eq = equilibrium(sys, AtomicMeasure::dirac(0.5), 1e-9, 400);
  d = fmt("trace=%.0f rate=%.4f r2=%.4f", static_cast<double>(eq.trace.size()), eq.fit.rate, eq.fit.r2);
  return eq.trace.size() >= 20 && eq.fit.rate < 1.0 && eq.fit.r2 > kFitR2;
}

bool c7(std::string& d) {
  auto sys = cosine_solenoid(256, 256);
  auto eq = equilibrium(sys, AtomicMeasure::dirac(0.5));
  auto r = regularity_check(sys, eq.family);
  d = fmt("H=%.4f bound=%.4f slack=%.4f", r.H, r.bound, r.slack);
  return eq.converged && r.pass;
}

bool c8(std::string& d) {
  auto sys = cosine_solenoid(256, 256);
  auto eq = equilibrium(sys, AtomicMeasure::dirac(0.5));
  RealFn psi = [](double x) { return std::cos(2 * pi * x); };
  FiberFn obs = [](double x, double y) { return (x - 0.5) * (x - 0.5) + y * y; };
  auto cs = correlation(sys, eq.family, psi, obs, 25);
  auto mc = correlation_monte_carlo(sys, eq.family, psi, obs, 10, 5000000, 11);
  double worst = 0.0;
  for (int n = 0; n <= 10; ++n) worst = std::max(worst, std::fabs(mc.C[n] - cs.C_values[n]) / mc.se[n]);
  d = fmt("tau=%.4f r2=%.4f used=%.0f max|dC|/se=%.2f", cs.fitted_rate, cs.fit_r2, cs.fit_used, worst);
  return cs.fitted_rate < 1.0 && cs.fit_r2 > kFitR2 && worst <= kMcSigmas;
}

bool c9(std::string& d) {
  auto sys = cosine_solenoid(8192, 256);
  auto eq_sys = cosine_solenoid(256, 256);
  auto eq = equilibrium(eq_sys, AtomicMeasure::dirac(0.5));
  // the chain runs on the finer grid with leaves interpolated from the equilibrium grid
  LeafFamily fam = eq.family;
  FiberFn obs = [](double x, double) { return std::cos(2 * pi * x); };
  auto r = clt_sample(sys, fam, obs, 1000, 10000, 5);
  FiberFn cob = [](double x, double) { return std::cos(2 * pi * std::fmod(2 * x, 1.0)) - std::cos(2 * pi * x); };
  auto rc = clt_sample(sys, fam, cob, 1000, 10000, 6, kDegenerateSigma);
  d = fmt("sigma2=%.4f ks=%.4f crit=%.4f cob sigma2=%.2e", r.sigma_sq_estimate, r.ks_statistic, r.ks_critical,
          rc.sigma_sq_estimate);
  return !r.degenerate && r.ks_pass && rc.degenerate && rc.sigma_sq_estimate <= kDegenerateSigma && rc.sums_vanish;
}

bool c10(std::string& d) {
  const int N = 256, bins = 256;
  const double alpha = 0.5;
  auto build = [&](const FiberMap& g) {
    return make_system(doubling(true), g, constant_potential(-std::log(2.0), 1.0, 0.05, true), 1.0, N, bins);
  };
  auto fam = fiber_shift_family(build, solenoid_fiber(2, alpha, 0.15, 0.1), {0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001});
  CurveOptions opt;
  auto c = stability_curve(fam, opt);
  bool coupling = true;
  double worst = 0.0;
  for (auto& r : c.rows) {
    double bound = r.delta / (1.0 - alpha) + 2.0 / bins;
    worst = std::max(worst, r.distance / bound);
    if (r.distance > bound) coupling = false;
  }
  d = fmt("monotone=%.0f max d/coupling=%.3f C_hat=%.3f last ratio=%.3f", c.monotone, worst, c.C_hat, c.last_ratio);
  return c.pass && coupling;
}

bool c11(std::string& d) {
  auto build = [](const IntervalMap& f) {
    return make_system(f, solenoid_fiber(2, 0.5, 0.25, 0.25), constant_potential(-std::log(2.0), 1.0, 0.05, true), 1.0,
                       256, 256);
  };
  auto fam = base_shift_family(build, 2, {0.1, 0.01, 0.001});
  auto s0 = fam.generator(0.0);
  bool ok = true;
  double disp_err = 0.0, jac = 0.0;
  for (double delta : fam.deltas) {
    auto sd = fam.generator(delta);
    auto r = check_admissibility(s0, sd, delta, fam.R(delta));
    disp_err = std::max(disp_err, std::fabs(r.preimage_displacement - delta / 2.0));
    jac = std::max(jac, r.jacobian_difference);
    ok = ok && r.u1 && r.u21 && r.u22;
  }
  double gap = gap_condition_value(3, 1, 2.0, 1.0, 1.0, 0.0);
  d = fmt("|disp-delta/2|=%.2e jac diff=%.2e gap=%.12f", disp_err, jac, gap);
  return ok && disp_err <= 1e-12 && jac <= 1e-12 && std::fabs(gap - 2.0 / 3.0) <= 1e-12;
}

bool c12(std::string& d) {
  const double alpha = 0.5;
  auto sys = make_system(doubling(true), fixed_fiber(2, 0.0, alpha, 0.0),
                         constant_potential(-std::log(2.0), 1.0, 0.05, true), 1.0, 256, 256);
  FiberFn phibar = [](double, double y) { return -std::log(2.0) + y; };
  std::vector<int> ns{100, 1000, 10000};
  auto r = birkhoff_cohomology_check(sys, phibar, 0.0, 20, ns, 3);
  double err = 0.0;
  for (auto& o : r.orbits)
    for (std::size_t k = 0; k < ns.size(); ++k) {
      double n = ns[k];
      double closed = o.y_start * (1.0 - std::pow(alpha, n)) / (n * (1.0 - alpha));
      err = std::max(err, std::fabs(o.delta[k] - closed));
    }
  // forced class-S solenoid: G(x, 0) = 0 with x-dependent contraction
  auto forced = make_system(doubling(true), fixed_fiber(2, 0.0, 0.35, 0.15),
                            constant_potential(-std::log(2.0), 1.0, 0.05, true), 1.0, 256, 256);
  auto rf = birkhoff_cohomology_check(forced, phibar, 0.0, 20, ns, 4);
  d = fmt("closed-form err=%.2e C=%.4f forced C=%.4f", err, r.C, rf.C);
  return err <= kCohomologyTol && r.bound_holds && r.decay_ok && rf.bound_holds && rf.decay_ok;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<Gate> gates{
      {1, "closed-form eigendata", 5, c1},
      {2, "normalization identity", 60, c2},
      {3, "W-K oracle equivalence", 30, c3},
      {4, "fiber contraction", 60, c4},
      {5, "equilibrium fixed points", 60, c5},
      {6, "exponential convergence", 120, c6},
      {7, "regularity bound", 120, c7},
      {8, "decay of correlations", 120, c8},
      {9, "central limit theorem", 120, c9},
      {10, "stability envelope", 300, c10},
      {11, "admissibility dossier", 60, c11},
      {12, "cohomology", 60, c12},
  };
  int failed = 0;
  std::vector<int> only;
  for (int k = 1; k < argc; ++k) only.push_back(std::atoi(argv[k]));
  int run = 0;
  for (auto& g : gates) {
    if (!only.empty() && std::find(only.begin(), only.end(), g.id) == only.end()) continue;
    ++run;
    std::string detail;
    bool ok = false;
    auto t0 = std::chrono::steady_clock::now();
    try {
      ok = g.body(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > g.limit_s) {
      ok = false;
      detail += " (over time limit)";
    }
    std::printf("[%s] criterion %2d %-26s %7.2fs  %s\n", ok ? "PASS" : "FAIL", g.id, g.name.c_str(), secs,
                detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failed;
  }
  std::printf("%d/%d criteria passed\n", run - failed, run);
  return failed == 0 ? 0 : 1;
}
