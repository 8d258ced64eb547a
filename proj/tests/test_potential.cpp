#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ergo/common.hpp"
#include "ergo/potential.hpp"

using namespace ergo;

TEST_CASE("estimate_holder_constant examples") {
  CHECK(estimate_holder_constant([](double) { return 3.0; }, 1.0, 64, false) == 0.0);
  CHECK(std::fabs(estimate_holder_constant([](double x) { return x; }, 1.0, 64, false) - 1.0) <= 1e-9);
  auto c = constant_potential(0.7, 1.0, 0.1);
  CHECK(c.holder_constant_estimate == 0.0);
  CHECK(c.sup_val == c.inf_val);
}

TEST_CASE("MP geometric potential envelope") {
  const double alpha = 0.5;
  auto mp = manneville_pomeau(alpha);
  for (double t : {0.1, -0.1, 1.0}) {
    auto phi = geometric_potential(mp, t, alpha, 0.3);
    CHECK(phi.sup_val - phi.inf_val <= std::fabs(t) * std::log(2.0 + alpha) + 1e-12);
    // raw differences on sampled pairs with separation >= 0.01
    double worst = 0.0;
    for (int i = 1; i < 200; ++i)
      for (int j = i + 2; j < 200; ++j) {
        double x = i / 200.0, y = j / 200.0;
        worst = std::max(worst, std::fabs(phi.eval(x) - phi.eval(y)));
      }
    CHECK(worst <= std::fabs(t) * std::log(2.0 + alpha) + 1e-12);
  }
}

TEST_CASE("holder estimate is monotone in the grid") {
  auto mp = manneville_pomeau(0.5);
  auto phi = geometric_potential(mp, 0.1, 0.5, 0.3);
  double prev = 0.0;
  for (int g : {16, 32, 64, 128, 256}) {
    double h = estimate_holder_constant(phi, g);
    CHECK(h >= prev);
    prev = h;
  }
  RealFn s = [](double x) { return std::sin(7.0 * x) + std::sqrt(x); };
  CHECK(estimate_holder_constant(s, 0.7, 128, false) >= estimate_holder_constant(s, 0.7, 64, false));
}

TEST_CASE("check_PM_membership examples") {
  auto z = check_PM_membership(constant_potential(0.0, 1.0, 0.1));
  CHECK(z.f31);
  CHECK(z.f32);
  auto mp = manneville_pomeau(0.5, 0.1);
  auto g = check_PM_membership(geometric_potential(mp, 0.01, 0.5, 0.1));
  CHECK(g.pass());
  auto big = check_PM_membership(make_potential("10x", [](double x) { return 10.0 * x; }, 1.0, 0.1, false));
  CHECK_FALSE(big.f31);
  CHECK(big.oscillation > 9.9);
  auto t10 = check_PM_membership(geometric_potential(mp, 10.0, 0.5, 0.1));
  CHECK_FALSE(t10.pass());
}

TEST_CASE("gap_condition_value examples") {
  CHECK(gap_condition_value(3, 1, 2.0, 1.0, 1.0, 0.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(gap_condition_value(2, 0, 2.0, 1.0, 1.0, 0.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK_THROWS_AS(gap_condition_value(2, 2, 2.0, 1.0, 1.0, 0.0), hypothesis_violation);
  try {
    gap_condition_value(3, 3, 2.0, 1.0, 1.0, 0.0);
  } catch (const hypothesis_violation& e) {
    CHECK(e.condition == "(f2)");
  }
  CHECK_THROWS_AS(gap_condition_value(2, 0, 1.0, 1.0, 1.0, 0.0), invalid_input);
  CHECK_THROWS_AS(gap_condition_value(2, 0, 2.0, 0.5, 1.0, 0.0), invalid_input);
  // explicit exponent differs from zeta
  CHECK(gap_condition_value(2, 0, 4.0, 1.0, 1.0, 0.0, 0.5) == doctest::Approx(0.5));
}

TEST_CASE("gap_condition_value monotonicity") {
  double prev = 0.0;
  for (double e : {0.0, 0.01, 0.05, 0.1}) {
    double v = gap_condition_value(3, 1, 2.0, 1.2, 0.7, e);
    CHECK(v > prev);
    prev = v;
  }
  prev = 0.0;
  for (double L : {1.0, 1.1, 1.5, 2.0}) {
    double v = gap_condition_value(3, 1, 2.0, L, 0.7, 0.02);
    CHECK(v >= prev);
    prev = v;
  }
  prev = 0.0;
  for (int q : {0, 1, 2}) {
    double v = gap_condition_value(3, q, 2.0, 1.3, 0.7, 0.02);
    CHECK(v > prev);
    prev = v;
  }
  prev = 1e9;
  for (double s : {1.1, 1.5, 2.0, 3.0}) {
    double v = gap_condition_value(3, 1, s, 1.3, 0.7, 0.02);
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("geometric_potential examples") {
  auto d = geometric_potential(doubling(), 1.0, 1.0, 0.1);
  CHECK(d.is_constant);
  CHECK(d.eval(0.37) == doctest::Approx(-std::log(2.0)).epsilon(1e-15));
  auto t = geometric_potential(l_adic(3), 1.0, 1.0, 0.1);
  CHECK(t.eval(0.9) == doctest::Approx(-std::log(3.0)).epsilon(1e-15));
  auto mp = geometric_potential(manneville_pomeau(0.5), 0.1, 0.5, 0.3);
  CHECK(mp.sup_val - mp.inf_val <= 0.1 * std::log(2.5) + 1e-12);
  CHECK(mp.inf_val <= mp.sup_val);
}

TEST_CASE("reduce_fiber_potential") {
  auto psi = [](double x) { return std::cos(2 * pi * x); };
  FiberFn G0 = [](double, double y) { return 0.5 * y; };
  auto r = reduce_fiber_potential(G0, [&](double x, double y) { return psi(x) + 0.3 * y; }, 0.0, 1.0, 0.1, true, 256);
  for (int k = 0; k < 50; ++k) {
    double x = (k + 0.5) / 50;
    CHECK(r.eval(x) == doctest::Approx(psi(x)).epsilon(1e-15));
  }
  FiberFn Gany = [](double, double y) { return y; };
  auto r2 = reduce_fiber_potential(Gany, [&](double x, double) { return psi(x); }, 0.37, 1.0, 0.1, true, 64);
  CHECK(r2.eval(0.2) == doctest::Approx(psi(0.2)));
  auto r3 = reduce_fiber_potential(G0, [](double, double y) { return -std::log(2.0) + y; }, 0.0, 1.0, 0.1, true, 64);
  CHECK(r3.sup_val - r3.inf_val <= 1e-15);
  FiberFn Gshift = [](double x, double y) { return 0.5 * y + 0.1 * (1 + std::cos(2 * pi * x)); };
  CHECK_THROWS_AS(reduce_fiber_potential(Gshift, [](double, double y) { return y; }, 0.0, 1.0, 0.1, true, 64),
                  hypothesis_violation);
}

TEST_CASE("expansion condition checker") {
  auto ok = check_expansion_condition([](double, double) { return 1.5; }, [](double, double) { return 2.0; }, 16);
  CHECK(ok.pass);
  CHECK(ok.min_margin == doctest::Approx(0.5));
  auto bad = check_expansion_condition([](double, double) { return 3.0; }, [](double, double) { return 1.9; }, 16);
  CHECK_FALSE(bad.pass);
}
