#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "ergo/common.hpp"
#include "ergo/parallel.hpp"
#include "ergo/rng.hpp"
#include "ergo/statistics.hpp"

using namespace ergo;

namespace {

struct Fixture {
  SkewSystem sys;
  LeafFamily eq;
};

const Fixture& solenoid() {
  static Fixture fx = [] {
    auto s = make_system(doubling(true), solenoid_fiber(2, 0.5, 0.25, 0.25),
                         constant_potential(-std::log(2.0), 1.0, 0.05, true), 1.0, 256, 256);
    auto e = equilibrium(s, AtomicMeasure::dirac(0.5), 1e-8, 400);
    return Fixture{s, e.family};
  }();
  return fx;
}

}  // namespace

TEST_CASE("rng streams") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a() == b());
  Rng s0 = Rng::stream(42, 0), s1 = Rng::stream(42, 1), s1b = Rng::stream(42, 1);
  bool differ = false;
  for (int i = 0; i < 100; ++i) {
    auto u = s1(), v = s1b();
    CHECK(u == v);
    if (s0() != u) differ = true;
  }
  CHECK(differ);
  Rng u(7);
  double mean = 0.0;
  for (int i = 0; i < 100000; ++i) {
    double x = u.uniform();
    REQUIRE(x >= 0.0);
    REQUIRE(x < 1.0);
    mean += x / 100000;
  }
  CHECK(std::fabs(mean - 0.5) < 0.005);
}

TEST_CASE("normal cdf and KS calibration") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5));
  CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-9));
  std::mt19937_64 gen(2024);
  std::normal_distribution<double> nd(0.0, 1.0);
  int pass = 0;
  for (int t = 0; t < 100; ++t) {
    std::vector<double> xs(1000);
    for (auto& x : xs) x = nd(gen);
    if (ks_statistic_normal(xs, 1.0) < ks_critical_5pct(1000)) ++pass;
  }
  CHECK(pass >= 90);
  std::vector<double> wide(1000);
  for (auto& x : wide) x = 2.0 * nd(gen);
  CHECK(ks_statistic_normal(wide, 1.0) > ks_critical_5pct(1000));
}

TEST_CASE("base chain samples m") {
  const auto& fx = solenoid();
  BaseChain chain(fx.sys);
  Rng rng(3);
  std::vector<double> xs;
  std::vector<int> br;
  int left = 0;
  const int T = 20000;
  for (int t = 0; t < T; ++t) {
    chain.orbit(rng, 4, xs, br);
    REQUIRE(xs.size() == 4u);
    for (int k = 0; k + 1 < 4; ++k) {
      CHECK(std::fabs(eval(fx.sys.base, xs[k]) - xs[k + 1]) < 1e-9);
      CHECK(br[k] == fx.sys.base.branch_of(xs[k]));
    }
    if (xs[0] < 0.5) ++left;
  }
  CHECK(std::fabs(left / double(T) - 0.5) < 0.02);
}

TEST_CASE("correlation vanishes for constant psi or constant observable") {
  const auto& fx = solenoid();
  auto c1 = correlation(fx.sys, fx.eq, [](double) { return 1.0; }, [](double x, double y) { return x * y; }, 10);
  for (double c : c1.C_values) CHECK(std::fabs(c) < 1e-10);
  auto c2 = correlation(fx.sys, fx.eq, [](double x) { return std::cos(2 * pi * x); }, [](double, double) { return 3.0; },
                        10);
  for (double c : c2.C_values) CHECK(std::fabs(c) < 1e-10);
}

TEST_CASE("clt: constant shift invariance, degenerate branch, reproducibility") {
  const auto& fx = solenoid();
  auto f0 = [](double x, double y) { return std::cos(2 * pi * x) + y; };
  auto f3 = [](double x, double y) { return std::cos(2 * pi * x) + y + 3.0; };
  auto r0 = clt_sample(fx.sys, fx.eq, f0, 64, 2000, 11);
  auto r3 = clt_sample(fx.sys, fx.eq, f3, 64, 2000, 11);
  CHECK(r3.sigma_sq_estimate == doctest::Approx(r0.sigma_sq_estimate).epsilon(1e-8));
  for (long t = 0; t < 2000; ++t) CHECK(std::fabs(r0.sums[t] - r3.sums[t]) < 1e-8);
  CHECK_FALSE(r0.degenerate);

  auto z = clt_sample(fx.sys, fx.eq, [](double, double) { return 0.0; }, 64, 1000, 5);
  CHECK(z.degenerate);
  CHECK(z.sigma_sq_estimate == 0.0);
  CHECK(z.max_abs_normalized == 0.0);

  int before = workers();
  set_workers(1);
  auto a = clt_sample(fx.sys, fx.eq, f0, 32, 1500, 99);
  set_workers(3);
  auto b = clt_sample(fx.sys, fx.eq, f0, 32, 1500, 99);
  set_workers(before);
  CHECK(a.sums == b.sums);
  CHECK_THROWS_AS(clt_sample(fx.sys, fx.eq, f0, 5, 1500, 1), invalid_input);
}

TEST_CASE("birkhoff cohomology") {
  auto sys = make_system(doubling(true), fixed_fiber(2, 0.5, 0.4, 0.2),
                         constant_potential(-std::log(2.0), 1.0, 0.05, true), 1.0, 256, 256);
  auto flat = birkhoff_cohomology_check(sys, [](double x, double) { return std::cos(2 * pi * x); }, 0.5, 20,
                                        {10, 100, 1000}, 4);
  for (auto& o : flat.orbits)
    for (double d : o.delta) CHECK(d < 1e-3);
  auto lin = birkhoff_cohomology_check(sys, [](double, double y) { return y - std::log(2.0); }, 0.5, 20,
                                       {10, 100, 1000}, 4);
  CHECK(lin.bound_holds);
  CHECK(lin.decay_ok);
  CHECK(std::isfinite(lin.C));
  auto solenoid_sys = solenoid().sys;
  CHECK_THROWS_AS(birkhoff_cohomology_check(solenoid_sys, [](double, double y) { return y; }, 0.5, 5, {10}, 1),
                  hypothesis_violation);
}
