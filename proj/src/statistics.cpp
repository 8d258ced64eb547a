#include "ergo/statistics.hpp"

#include <algorithm>
#include <cmath>

#include "ergo/common.hpp"
#include "ergo/parallel.hpp"
#include "ergo/potential.hpp"

namespace ergo {

namespace {

std::vector<Rng> make_streams(std::uint64_t seed, std::size_t count) {
  std::vector<Rng> out;
  out.reserve(count);
  Rng r(seed);
  for (std::size_t k = 0; k < count; ++k) {
    out.push_back(r);
    r.jump();
  }
  return out;
}

}  // namespace

BaseChain::BaseChain(const SkewSystem& sys) : sys_(sys) {
  const Vec& m = sys.spec.m;
  cdf_.resize(m.size());
  double acc = 0.0;
  for (int i = 0; i < m.size(); ++i) {
    acc += m[i];
    cdf_[i] = acc;
  }
  for (double& c : cdf_) c /= acc;
}

double BaseChain::sample_m(Rng& rng) const {
  double u = rng.uniform();
  int i = static_cast<int>(std::upper_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin());
  i = std::min(i, static_cast<int>(cdf_.size()) - 1);
  return (i + rng.uniform()) / static_cast<double>(cdf_.size());
}

std::pair<double, int> BaseChain::step_back(double x, Rng& rng) const {
  const int deg = sys_.base.degree();
  double y[16], g[16];
  double tot = 0.0;
  for (int b = 0; b < deg; ++b) {
    y[b] = branch_inverse(sys_.base, b, x);
    g[b] = interp_eval(sys_.spec.h, y[b], sys_.base.circle) * std::exp(sys_.potential.eval(y[b]));
    tot += g[b];
  }
  double u = rng.uniform() * tot;
  for (int b = 0; b < deg - 1; ++b) {
    if (u < g[b]) return {y[b], b};
    u -= g[b];
  }
  return {y[deg - 1], deg - 1};
}

void BaseChain::orbit(Rng& rng, int len, std::vector<double>& xs, std::vector<int>& br) const {
  xs.resize(len);
  br.resize(len);
  xs[len - 1] = sample_m(rng);
  br[len - 1] = sys_.base.branch_of(xs[len - 1]);
  for (int k = len - 2; k >= 0; --k) std::tie(xs[k], br[k]) = step_back(xs[k + 1], rng);
}

LeafSampler::LeafSampler(const LeafFamily& fam) : fam_(fam) {
  cdf_.resize(fam.size());
  for (int i = 0; i < fam.size(); ++i) {
    double acc = 0.0;
    for (double w : fam.leaves[i].w) {
      if (w < 0) throw invalid_input("LeafSampler: negative leaf weight");
      acc += w;
      cdf_[i].push_back(acc);
    }
  }
}

double LeafSampler::sample(double x, Rng& rng) const {
  Interp ip = interp_at(x, fam_.size(), fam_.circle);
  double m0 = (1.0 - ip.w) * (cdf_[ip.i0].empty() ? 0.0 : cdf_[ip.i0].back());
  double m1 = ip.w * (cdf_[ip.i1].empty() ? 0.0 : cdf_[ip.i1].back());
  int leaf = rng.uniform() * (m0 + m1) < m0 ? ip.i0 : ip.i1;
  const auto& c = cdf_[leaf];
  double u = rng.uniform() * c.back();
  std::size_t k = static_cast<std::size_t>(std::upper_bound(c.begin(), c.end(), u) - c.begin());
  k = std::min(k, c.size() - 1);
  return fam_.leaves[leaf].pos[k];
}

Vec leaf_integrals(const SkewSystem& sys, const LeafFamily& eq, const FiberFn& obs) {
  const int N = sys.N;
  Vec s(N);
  if (eq.size() == N) {
    for (int i = 0; i < N; ++i) {
      double x = cell_center(i, N), acc = 0.0;
      const AtomicMeasure& leaf = eq.leaves[i];
      for (std::size_t a = 0; a < leaf.size(); ++a) acc += leaf.w[a] * obs(x, leaf.pos[a]);
      s[i] = acc;
    }
    return s;
  }
  LeafSampler ls(eq);
  for (int i = 0; i < N; ++i) s[i] = ls.integrate(cell_center(i, N), obs);
  return s;
}

CorrelationSeries correlation_from_s(const SkewSystem& sys, const Vec& psi, const Vec& s, int n_max) {
  CorrelationSeries cs;
  const Vec& m = sys.spec.m;
  cs.mean_psi = psi.dot(m);
  cs.mean_obs = s.dot(m);
  Vec v = s;
  std::vector<double> ns;
  for (int n = 0; n <= n_max; ++n) {
    cs.n_values.push_back(n);
    cs.C_values.push_back(psi.cwiseProduct(v).dot(m) - cs.mean_psi * cs.mean_obs);
    ns.push_back(n);
    v = normalized_apply(sys.spec, sys.op.A, v);
  }
  auto g = fit_geometric(ns, cs.C_values, 1e-13);
  cs.fitted_rate = g.rate;
  cs.fit_r2 = g.r2;
  cs.fit_used = g.used;
  return cs;
}

CorrelationSeries correlation(const SkewSystem& sys, const LeafFamily& eq, const RealFn& psi, const FiberFn& obs,
                              int n_max) {
  Vec s = leaf_integrals(sys, eq, obs);
  Vec p(sys.N);
  for (int i = 0; i < sys.N; ++i) p[i] = psi(cell_center(i, sys.N));
  return correlation_from_s(sys, p, s, n_max);
}

MonteCarloCorrelation correlation_monte_carlo(const SkewSystem& sys, const LeafFamily& eq, const RealFn& psi,
                                              const FiberFn& obs, int n_max, long samples, std::uint64_t seed) {
  BaseChain chain(sys);
  LeafSampler leaves(eq);
  Vec s = leaf_integrals(sys, eq, obs);
  Vec p(sys.N);
  for (int i = 0; i < sys.N; ++i) p[i] = psi(cell_center(i, sys.N));
  const double a = p.dot(sys.spec.m), b = s.dot(sys.spec.m);
  const long block = 4096;
  const std::size_t nblocks = static_cast<std::size_t>((samples + block - 1) / block);
  auto streams = make_streams(seed, nblocks);
  const int K = n_max + 1;
  // per block: sum psi_n, sum phi0, sum Z_n, sum Z_n^2
  std::vector<std::vector<double>> acc(nblocks, std::vector<double>(3 * K + 1, 0.0));
  parallel_for(nblocks, [&](std::size_t bi) {
    Rng rng = streams[bi];
    std::vector<double> xs;
    std::vector<int> br;
    auto& A = acc[bi];
    long lo = static_cast<long>(bi) * block, hi = std::min(samples, lo + block);
    for (long t = lo; t < hi; ++t) {
      chain.orbit(rng, K, xs, br);
      double y0 = leaves.sample(xs[0], rng);
      double f0 = obs(xs[0], y0) - b;
      A[3 * K] += f0;
      for (int n = 0; n < K; ++n) {
        double pn = psi(xs[n]) - a;
        double z = pn * f0;
        A[n] += pn;
        A[K + n] += z;
        A[2 * K + n] += z * z;
      }
    }
  });
  std::vector<double> tot(3 * K + 1, 0.0);
  for (auto& A : acc)
    for (std::size_t k = 0; k < tot.size(); ++k) tot[k] += A[k];
  MonteCarloCorrelation out;
  out.samples = samples;
  const double S = static_cast<double>(samples);
  double fbar = tot[3 * K] / S;
  for (int n = 0; n < K; ++n) {
    double pbar = tot[n] / S;
    double zbar = tot[K + n] / S;
    double var = std::max(0.0, tot[2 * K + n] / S - zbar * zbar);
    out.C.push_back(zbar - pbar * fbar);
    out.se.push_back(std::sqrt(var / S));
  }
  return out;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double ks_statistic_normal(std::vector<double> xs, double sigma) {
  std::sort(xs.begin(), xs.end());
  const double S = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double F = normal_cdf(xs[i] / sigma);
    d = std::max(d, std::max((i + 1) / S - F, F - i / S));
  }
  return d;
}

CltReport clt_sample(const SkewSystem& sys, const LeafFamily& eq, const FiberFn& obs, int n, long samples,
                     std::uint64_t seed, double degenerate_threshold) {
  if (samples < 1000) throw invalid_input("clt_sample: samples < 1000");
  if (n < 10) throw invalid_input("clt_sample: n < 10");
  CltReport r;
  r.sample_count = samples;
  r.n = n;
  const Vec& m = sys.spec.m;
  Vec s = leaf_integrals(sys, eq, obs);
  Vec s2 = leaf_integrals(sys, eq, [&](double x, double y) { double v = obs(x, y); return v * v; });
  Vec mass = leaf_integrals(sys, eq, [](double, double) { return 1.0; });
  r.mean_obs = s.dot(m);
  r.c0 = s2.dot(m) - r.mean_obs * r.mean_obs;
  Vec psi = s.cwiseQuotient(mass);
  double mean_psi = psi.dot(m);
  double sigma = r.c0;
  Vec v = s;
  for (int j = 1; j <= n; ++j) {
    v = normalized_apply(sys.spec, sys.op.A, v);
    double c = psi.cwiseProduct(v).dot(m) - mean_psi * r.mean_obs;
    r.truncation_lag = j;
    if (std::fabs(c) < 1e-10) break;
    sigma += 2.0 * c;
  }
  if (sigma < 0.0) {
    r.sigma_floored = true;
    sigma = 0.0;
  }
  r.sigma_sq_estimate = sigma;

  BaseChain chain(sys);
  LeafSampler leaves(eq);
  const long block = 256;
  const std::size_t nblocks = static_cast<std::size_t>((samples + block - 1) / block);
  auto streams = make_streams(seed, nblocks);
  r.sums.assign(samples, 0.0);
  std::vector<double> shorts(samples, 0.0);
  const int n_short = std::max(1, n / 10);
  parallel_for(nblocks, [&](std::size_t bi) {
    Rng rng = streams[bi];
    std::vector<double> xs;
    std::vector<int> br;
    long lo = static_cast<long>(bi) * block, hi = std::min(samples, lo + block);
    for (long t = lo; t < hi; ++t) {
      chain.orbit(rng, n, xs, br);
      double y = leaves.sample(xs[0], rng);
      double acc = 0.0;
      for (int k = 0; k < n; ++k) {
        acc += obs(xs[k], y) - r.mean_obs;
        if (k + 1 == n_short) shorts[t] = acc / std::sqrt(static_cast<double>(n_short));
        y = sys.fiber.G[br[k]](xs[k], y);
      }
      r.sums[t] = acc / std::sqrt(static_cast<double>(n));
    }
  });
  for (long t = 0; t < samples; ++t) {
    r.max_abs_normalized = std::max(r.max_abs_normalized, std::fabs(r.sums[t]));
    r.max_abs_normalized_short = std::max(r.max_abs_normalized_short, std::fabs(shorts[t]));
  }
  r.ks_critical = ks_critical_5pct(samples);
  if (r.sigma_sq_estimate <= degenerate_threshold) {
    r.degenerate = true;
    // bounded S_n shrinks like 1/sqrt(n); a nondegenerate sum would not
    r.sums_vanish = r.max_abs_normalized <= 0.5 * r.max_abs_normalized_short;
  } else {
    r.ks_statistic = ks_statistic_normal(r.sums, std::sqrt(r.sigma_sq_estimate));
    r.ks_pass = r.ks_statistic < r.ks_critical;
  }
  return r;
}

CohomologyReport birkhoff_cohomology_check(const SkewSystem& sys, const FiberFn& phibar, double y0, int orbit_count,
                                           const std::vector<int>& ns, std::uint64_t seed) {
  auto G = [&sys](double x, double y) { return sys.G_at(x, y); };
  HolderPotential reduced =
      reduce_fiber_potential(G, phibar, y0, sys.zeta, sys.potential.epsilon_phi, sys.base.circle, 256);
  CohomologyReport rep;
  rep.ns = ns;
  int nmax = *std::max_element(ns.begin(), ns.end());
  BaseChain chain(sys);
  auto streams = make_streams(seed, orbit_count);
  rep.orbits.resize(orbit_count);
  parallel_for(orbit_count, [&](std::size_t o) {
    Rng rng = streams[o];
    std::vector<double> xs;
    std::vector<int> br;
    chain.orbit(rng, nmax, xs, br);
    double y = rng.uniform();
    CohomologyOrbit orb;
    orb.y_start = y;
    double full = 0.0, red = 0.0;
    std::size_t next = 0;
    std::vector<int> sorted = ns;
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> d(ns.size());
    for (int k = 0; k < nmax; ++k) {
      full += phibar(xs[k], y);
      red += reduced.eval(xs[k]);
      y = sys.fiber.G[br[k]](xs[k], y);
      while (next < sorted.size() && sorted[next] == k + 1) {
        for (std::size_t q = 0; q < ns.size(); ++q)
          if (ns[q] == k + 1) d[q] = std::fabs(full - red) / (k + 1);
        ++next;
      }
    }
    orb.delta = d;
    rep.orbits[o] = orb;
  });
  rep.bound_holds = true;
  rep.decay_ok = true;
  for (auto& orb : rep.orbits)
    for (std::size_t q = 0; q < ns.size(); ++q) rep.C = std::max(rep.C, ns[q] * orb.delta[q]);
  for (auto& orb : rep.orbits)
    for (std::size_t q = 0; q < ns.size(); ++q) {
      if (orb.delta[q] > rep.C / ns[q] * (1.0 + 1e-12)) rep.bound_holds = false;
      for (std::size_t p = 0; p < ns.size(); ++p)
        if (ns[p] == 10 * ns[q] && orb.delta[p] > orb.delta[q] / 5.0) rep.decay_ok = false;
    }
  return rep;
}

OrbitComparison orbit_leaf_comparison(const SkewSystem& sys, const LeafFamily& eq, long steps, int cells,
                                      std::uint64_t seed) {
  const int len = 10000, burn = 64, bins = sys.bins;
  const long orbits = std::max(1L, steps / len);
  const long per_block = 10;
  const std::size_t nblocks = static_cast<std::size_t>((orbits + per_block - 1) / per_block);
  BaseChain chain(sys);
  auto streams = make_streams(seed, nblocks);
  std::vector<std::vector<double>> counts(nblocks);
  parallel_for(nblocks, [&](std::size_t bi) {
    Rng rng = streams[bi];
    auto& c = counts[bi];
    c.assign(static_cast<std::size_t>(cells) * bins, 0.0);
    std::vector<double> xs;
    std::vector<int> br;
    long lo = static_cast<long>(bi) * per_block, hi = std::min(orbits, lo + per_block);
    for (long o = lo; o < hi; ++o) {
      chain.orbit(rng, len + burn, xs, br);
      double y = rng.uniform();
      for (int k = 0; k < len + burn; ++k) {
        if (k >= burn) {
          int cell = std::min(cells - 1, static_cast<int>(xs[k] * cells));
          c[static_cast<std::size_t>(cell) * bins + bin_index(y, bins)] += 1.0;
        }
        y = sys.fiber.G[br[k]](xs[k], y);
      }
    }
  });
  std::vector<double> tot(static_cast<std::size_t>(cells) * bins, 0.0);
  for (auto& c : counts)
    for (std::size_t k = 0; k < tot.size(); ++k) tot[k] += c[k];
  OrbitComparison out;
  out.samples = orbits * len;
  out.cells = cells;
  const int N = eq.size();
  for (int c = 0; c < cells; ++c) {
    std::vector<std::pair<double, double>> atoms;
    double em = 0.0, lm = 0.0;
    for (int k = 0; k < bins; ++k) em += tot[static_cast<std::size_t>(c) * bins + k];
    std::vector<std::pair<double, double>> leaf_atoms;
    for (int i = 0; i < N; ++i) {
      int ci = std::min(cells - 1, static_cast<int>(cell_center(i, N) * cells));
      if (ci != c) continue;
      const AtomicMeasure& l = coarsen(eq.leaves[i], bins);
      for (std::size_t a = 0; a < l.size(); ++a) {
        leaf_atoms.emplace_back(l.pos[a], eq.base_weights[i] * l.w[a]);
        lm += eq.base_weights[i] * l.w[a];
      }
    }
    if (em == 0.0 || lm == 0.0) continue;
    for (int k = 0; k < bins; ++k) {
      double v = tot[static_cast<std::size_t>(c) * bins + k];
      if (v > 0) atoms.emplace_back((k + 0.5) / bins, v / em);
    }
    for (auto& a : leaf_atoms) a.second /= lm;
    AtomicMeasure emp = AtomicMeasure::from_atoms(atoms), eqc = AtomicMeasure::from_atoms(leaf_atoms);
    out.max_distance = std::max(out.max_distance, wk_norm(emp - eqc, sys.zeta));
  }
  return out;
}

}  // namespace ergo
