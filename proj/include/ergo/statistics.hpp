#pragma once

#include <cstdint>
#include <vector>

#include "ergo/measure.hpp"
#include "ergo/rng.hpp"
#include "ergo/skew.hpp"

namespace ergo {

// stationary base orbits drawn backwards: x_T ~ m, then preimages chosen with probability
// h(y) e^{phi(y)} / (lambda h(x))
class BaseChain {
 public:
  explicit BaseChain(const SkewSystem& sys);
  double sample_m(Rng& rng) const;
  // returns (preimage, branch)
  std::pair<double, int> step_back(double x, Rng& rng) const;
  // fills xs[0..len-1] with a forward orbit segment of a stationary point and br[k] = branch of xs[k]
  void orbit(Rng& rng, int len, std::vector<double>& xs, std::vector<int>& br) const;

 private:
  const SkewSystem& sys_;
  std::vector<double> cdf_;
};

// draws fiber points from an equilibrium family at arbitrary base points
class LeafSampler {
 public:
  explicit LeafSampler(const LeafFamily& fam);
  double sample(double x, Rng& rng) const;
  // integral of fn(x, .) against the leaf interpolated at x
  template <class Fn>
  double integrate(double x, Fn&& fn) const;

 private:
  const LeafFamily& fam_;
  std::vector<std::vector<double>> cdf_;
};

template <class Fn>
double LeafSampler::integrate(double x, Fn&& fn) const {
  Interp ip = interp_at(x, fam_.size(), fam_.circle);
  double out = 0.0;
  const int idx[2] = {ip.i0, ip.i1};
  const double wt[2] = {1.0 - ip.w, ip.w};
  for (int k = 0; k < 2; ++k) {
    if (wt[k] == 0.0) continue;
    const AtomicMeasure& leaf = fam_.leaves[idx[k]];
    double s = 0.0;
    for (std::size_t a = 0; a < leaf.size(); ++a) s += leaf.w[a] * fn(x, leaf.pos[a]);
    out += wt[k] * s;
  }
  return out;
}

struct CorrelationSeries {
  std::vector<int> n_values;
  std::vector<double> C_values;
  double fitted_rate = 0.0;
  double fit_r2 = 0.0;
  int fit_used = 0;
  double mean_psi = 0.0, mean_obs = 0.0;
};

// leaf integrals s_i of obs on the system grid (density with respect to m)
Vec leaf_integrals(const SkewSystem& sys, const LeafFamily& eq, const FiberFn& obs);

CorrelationSeries correlation(const SkewSystem& sys, const LeafFamily& eq, const RealFn& psi, const FiberFn& obs,
                              int n_max);
CorrelationSeries correlation_from_s(const SkewSystem& sys, const Vec& psi, const Vec& s, int n_max);

struct MonteCarloCorrelation {
  std::vector<double> C, se;
  long samples = 0;
};

MonteCarloCorrelation correlation_monte_carlo(const SkewSystem& sys, const LeafFamily& eq, const RealFn& psi,
                                              const FiberFn& obs, int n_max, long samples, std::uint64_t seed);

struct CltReport {
  long sample_count = 0;
  int n = 0;
  double mean_obs = 0.0;
  double sigma_sq_estimate = 0.0;
  double c0 = 0.0;
  int truncation_lag = 0;
  bool sigma_floored = false;
  bool degenerate = false;
  double ks_statistic = 0.0;
  double ks_critical = 0.0;
  bool ks_pass = false;
  double max_abs_normalized = 0.0;        // at length n
  double max_abs_normalized_short = 0.0;  // at length n / 10
  bool sums_vanish = false;
  std::vector<double> sums;
};

CltReport clt_sample(const SkewSystem& sys, const LeafFamily& eq, const FiberFn& obs, int n, long samples,
                     std::uint64_t seed, double degenerate_threshold = 1e-12);

double normal_cdf(double x);
double ks_statistic_normal(std::vector<double> xs, double sigma);
inline double ks_critical_5pct(long samples) { return 1.358 / std::sqrt(static_cast<double>(samples)); }

struct CohomologyOrbit {
  double y_start = 0.0;
  std::vector<double> delta;  // per n
};

struct CohomologyReport {
  std::vector<int> ns;
  std::vector<CohomologyOrbit> orbits;
  double C = 0.0;       // max over orbits and n of n * delta_n
  bool bound_holds = false;
  bool decay_ok = false;  // delta_{10n} <= delta_n / 5
};

CohomologyReport birkhoff_cohomology_check(const SkewSystem& sys, const FiberFn& phibar, double y0, int orbit_count,
                                           const std::vector<int>& ns, std::uint64_t seed);

// Monte Carlo orbit estimate of the equilibrium leaves aggregated to cells, compared leafwise
struct OrbitComparison {
  double max_distance = 0.0;
  long samples = 0;
  int cells = 0;
};

OrbitComparison orbit_leaf_comparison(const SkewSystem& sys, const LeafFamily& eq, long steps, int cells,
                                      std::uint64_t seed);

}  // namespace ergo
