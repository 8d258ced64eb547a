#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ergo/base_map.hpp"
#include "ergo/common.hpp"
#include "ergo/rng.hpp"

using namespace ergo;

TEST_CASE("eval examples") {
  auto mp = manneville_pomeau(0.5);
  CHECK(eval(mp, 0.5) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(eval(mp, 0.75) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(eval(manneville_pomeau(0.3), 0.5) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(eval(doubling(), 0.3) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK_THROWS_AS(eval(doubling(), 1.5), invalid_input);
  CHECK_THROWS_AS(eval(doubling(), -0.1), invalid_input);
}

TEST_CASE("boundary convention") {
  auto d = doubling();
  // left-closed: 0.5 belongs to the second branch
  CHECK(d.branch_of(0.5) == 1);
  CHECK(eval(d, 0.5) == doctest::Approx(0.0));
  CHECK(d.branch_of(1.0) == 1);
  CHECK(eval(d, 1.0) == doctest::Approx(1.0));
  auto mp = manneville_pomeau(0.5);
  CHECK(mp.branch_of(0.5) == 0);
}

TEST_CASE("inverse branches") {
  auto d = doubling();
  auto p = inverse_branches(d, 0.5);
  REQUIRE(p.size() == 2);
  CHECK(p[0] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(p[1] == doctest::Approx(0.75).epsilon(1e-15));
  auto mp = manneville_pomeau(0.5);
  CHECK(branch_inverse(mp, 1, 0.5) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(std::fabs(branch_inverse(mp, 0, 1.0) - 0.5) <= 1e-12);
  // bisection oracle: x (1 + (2x)^alpha) = 0.3 has root near 0.1633
  double x = branch_inverse(mp, 0, 0.3);
  CHECK(std::fabs(x * (1.0 + std::sqrt(2.0 * x)) - 0.3) <= 1e-11);
}

TEST_CASE("check_structure examples") {
  auto r = check_structure(doubling(), 200);
  CHECK(r.all());
  CHECK(r.q == 0);
  auto m = check_structure(manneville_pomeau(0.5), 400);
  CHECK(m.f1);
  CHECK(m.q == 1);
  CHECK(m.all());
  auto mp = manneville_pomeau(0.5);
  CHECK(mp.L_max == 1.0);
  // negative control: a branch that misses part of [0,1]
  IntervalMap bad = doubling();
  bad.branches[1].forward = [](double x) { return 1.5 * x - 0.75; };
  bad.branches[1].inverse = nullptr;
  auto b = check_structure(bad, 200);
  bool ok = b.p2 && b.surjective;
  CHECK_FALSE(ok);
}

TEST_CASE("builders") {
  auto t = l_adic(3);
  REQUIRE(t.degree() == 3);
  CHECK(t.branches[0].a == 0.0);
  CHECK(t.branches[0].b == doctest::Approx(1.0 / 3.0));
  CHECK(t.branches[1].b == doctest::Approx(2.0 / 3.0));
  CHECK(t.branches[2].b == 1.0);
  auto mp = manneville_pomeau(0.5);
  CHECK(mp.degree() == 2);
  CHECK(mp.branches[0].b == 0.5);
  auto d = doubling(), l2 = l_adic(2);
  Rng rng(3);
  for (int k = 0; k < 1000; ++k) {
    double x = rng.uniform();
    CHECK(eval(d, x) == eval(l2, x));
  }
  CHECK_THROWS_AS(l_adic(1), invalid_input);
  CHECK_THROWS_AS(manneville_pomeau(1.2), invalid_input);
  CHECK_THROWS_AS(piecewise_affine({0.5, 2.0}, {0.0, 0.5, 1.0}), invalid_input);
  auto pa = piecewise_affine({3.0, 1.5}, {0.0, 1.0 / 3.0, 1.0});
  CHECK(check_structure(pa, 200).all());
}

TEST_CASE("round trip, monotone and contracting inverse branches") {
  std::vector<IntervalMap> maps{doubling(), l_adic(3), l_adic(3, true, 0.2), manneville_pomeau(0.5),
                                manneville_pomeau(0.8), piecewise_affine({3.0, 1.5}, {0.0, 1.0 / 3.0, 1.0})};
  Rng rng(11);
  for (auto& f : maps) {
    for (int b = 0; b < f.degree(); ++b) {
      for (int k = 0; k < 1000; ++k) {
        double y = rng.uniform();
        double x = branch_inverse(f, b, y);
        CHECK(base_distance(eval(f, x), y, f.circle) <= 1e-9);
      }
      // a shifted circle branch wraps once, at y = shift
      double prev = branch_inverse(f, b, 0.0);
      int jumps = 0;
      for (int k = 1; k <= 1000; ++k) {
        double y = k * 1e-3, x = branch_inverse(f, b, y);
        if (!f.circle) CHECK(x >= prev - 1e-15);
        if (base_distance(x, prev, f.circle) > 1e-3 + 1e-12) ++jumps;
        prev = x;
      }
      CHECK(jumps <= (f.circle ? 1 : 0));
    }
  }
}

TEST_CASE("circle shift preimages") {
  auto f = l_adic(2, true, 0.1);
  auto p = inverse_branches(f, 0.3);
  CHECK(p[0] == doctest::Approx(0.1));
  CHECK(p[1] == doctest::Approx(0.6));
  CHECK(base_distance(0.95, 0.05, true) == doctest::Approx(0.1));
}
