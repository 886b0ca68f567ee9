#include <cmath>
#include <limits>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "anisolt/metric.hpp"
#include "doctest.h"

using namespace anisolt;

TEST_CASE("hurst vector validation") {
  CHECK_THROWS_AS(HurstVector(std::vector<double>{}), InvalidArgument);
  CHECK_THROWS_AS(HurstVector({0.0}), InvalidArgument);
  CHECK_THROWS_AS(HurstVector({1.0}), InvalidArgument);
  CHECK_THROWS_AS(HurstVector({0.5, -0.2}), InvalidArgument);
  CHECK_THROWS_AS(HurstVector({std::numeric_limits<double>::quiet_NaN()}), InvalidArgument);
  CHECK_NOTHROW(HurstVector::allowing_unit({1.0, 0.5}));
  CHECK_THROWS_AS(HurstVector::allowing_unit({1.1}), InvalidArgument);
  CHECK(HurstVector::allowing_unit({1.0, 0.5}).has_unit_axis());
  CHECK_FALSE(HurstVector({0.5, 0.5}).has_unit_axis());
}

TEST_CASE("Q exponent") {
  CHECK(q_exponent(HurstVector{0.5, 0.5}) == doctest::Approx(4.0));
  // heat equation, N = 1, beta = 1: exponents ((2-beta)/4, (2-beta)/2)
  const double beta = 1.0, N = 1.0;
  const HurstVector she{(2 - beta) / 4, (2 - beta) / 2};
  CHECK(she.q() == doctest::Approx(6.0));
  CHECK(she.q() == doctest::Approx(2 * (2 + N) / (2 - beta)));
  const HurstVector H{0.3, 0.7, 0.9};
  CHECK(H.q() > 3.0);
}

TEST_CASE("rho and rho_tilde examples") {
  const HurstVector H{0.5, 1.0 / 3.0};
  const Point t{1, 1}, s{0, 0};
  CHECK(rho(t, s, H) == doctest::Approx(2.0));
  CHECK(rho_tilde(t, s, H) == doctest::Approx(1.0));
  CHECK(rho(t, t, H) == 0.0);
  CHECK(rho_tilde(t, t, H) == 0.0);
  const HurstVector h1{0.5};
  CHECK(rho(Point{4}, Point{0}, h1) == doctest::Approx(2.0));
  CHECK(distance(MetricKind::rho, t, s, H) == rho(t, s, H));
  CHECK(distance(MetricKind::rho_tilde, t, s, H) == rho_tilde(t, s, H));
}

TEST_CASE("dimension mismatch is rejected") {
  const HurstVector H{0.5, 0.5};
  CHECK_THROWS_AS(rho(Point{1}, Point{0, 0}, H), InvalidArgument);
  CHECK_THROWS_AS(rho_tilde(Point{1, 2, 3}, Point{0, 0}, H), InvalidArgument);
  CHECK_THROWS_AS(rho_tilde_ball_box(Point{0}, 1.0, H), InvalidArgument);
  CHECK_THROWS_AS(dyadic_counts(Box{{0}, {1}}, 1, H), InvalidArgument);
}

TEST_CASE("metric properties on random pairs") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> U(-2.0, 2.0), Hd(0.05, 0.95);
  std::uniform_int_distribution<int> Nd(1, 4);
  for (int i = 0; i < 100000; ++i) {
    const int N = Nd(gen);
    std::vector<double> h(N);
    for (auto& v : h) v = Hd(gen);
    const HurstVector H(h);
    Point t(N), s(N);
    for (int j = 0; j < N; ++j) {
      t[j] = U(gen);
      s[j] = U(gen);
    }
    const double r = rho(t, s, H), rt = rho_tilde(t, s, H);
    REQUIRE(r >= 0.0);
    REQUIRE(r == rho(s, t, H));
    REQUIRE(rt == rho_tilde(s, t, H));
    REQUIRE(rt <= r);
    REQUIRE(r <= N * rt);
    REQUIRE((r == 0.0) == (t == s));
  }
}

TEST_CASE("ball membership") {
  const HurstVector H{0.5};
  const AnisoBall b{{0.0}, 1.0, MetricKind::rho_tilde};
  CHECK(ball_contains(b, Point{1.0}, H));
  CHECK(ball_contains(b, Point{0.0}, H));
  CHECK(ball_contains(AnisoBall{{0.3}, 0.0, MetricKind::rho}, Point{0.3}, H));
  CHECK_FALSE(ball_contains(b, Point{1.0 + 1e-12}, H));
  const HurstVector H2{0.5, 0.25};
  const AnisoBall c{{0.1, 0.2}, 0.5, MetricKind::rho};
  const Point t{0.1 + 0.25, 0.2};  // rho = 0.5 exactly
  CHECK(ball_contains(c, t, H2));
  CHECK_FALSE(ball_contains(c, Point{0.1 + 0.26, 0.2}, H2));
}

TEST_CASE("ball containments B_rho(r) in B_rho_tilde(r) in B_rho(N r)") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const HurstVector H{0.3, 0.6, 0.8};
  const Point a{0.1, -0.2, 0.3};
  const double r = 0.7;
  for (int i = 0; i < 20000; ++i) {
    const Point t{U(gen), U(gen), U(gen)};
    const bool in_rho = ball_contains({a, r, MetricKind::rho}, t, H);
    const bool in_tilde = ball_contains({a, r, MetricKind::rho_tilde}, t, H);
    const bool in_big = ball_contains({a, 3 * r, MetricKind::rho}, t, H);
    if (in_rho) REQUIRE(in_tilde);
    if (in_tilde) REQUIRE(in_big);
    // the rho_tilde ball is exactly its box
    REQUIRE(in_tilde == rho_tilde_ball_box(a, r, H).contains(t));
  }
}

TEST_CASE("ball volumes") {
  const HurstVector H{0.3, 0.45, 0.9};
  for (double r : {0.1, 0.5, 1.0, 2.5}) {
    const Box b = rho_tilde_ball_box(Point{0, 0, 0}, r, H);
    const double box_vol = (b.hi[0] - b.lo[0]) * (b.hi[1] - b.lo[1]) * (b.hi[2] - b.lo[2]);
    CHECK(std::abs(rho_tilde_ball_volume(r, H) / box_vol - 1.0) < 1e-12);
    CHECK(std::abs(rho_tilde_ball_volume(r, H) / (8.0 * std::pow(r, H.q())) - 1.0) < 1e-12);
  }
  // {sqrt|x| + sqrt|y| <= r} has area 2 r^4 / 3.
  CHECK(rho_ball_volume(0.8, HurstVector{0.5, 0.5}) == doctest::Approx(2.0 * std::pow(0.8, 4) / 3.0).epsilon(1e-12));
  // L1 ball: 2 r^2
  CHECK(rho_ball_volume(1.5, HurstVector::allowing_unit({1.0, 1.0})) == doctest::Approx(4.5).epsilon(1e-12));
  // mixed exponents against quadrature: 4 \int_0^{r^{1/h1}} (r - x^{h1})^{1/h2} dx
  const double h1 = 0.5, h2 = 0.3, r = 0.9;
  const double quad = 4.0 * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                                [&](double x) { return std::pow(std::max(0.0, r - std::pow(x, h1)), 1.0 / h2); },
                                0.0, std::pow(r, 1.0 / h1), 15, 1e-12);
  CHECK(rho_ball_volume(r, HurstVector{h1, h2}) == doctest::Approx(quad).epsilon(1e-8));
}

TEST_CASE("dyadic cells") {
  SUBCASE("examples") {
    const auto c1 = dyadic_cells(Box{{0}, {1}}, 1, HurstVector{0.5});
    REQUIRE(c1.size() == 4);
    for (const auto& c : c1) CHECK(c.box.hi[0] - c.box.lo[0] == doctest::Approx(0.25));
    const auto c2 = dyadic_cells(Box{{0, 0}, {1, 1}}, 1, HurstVector::allowing_unit({0.5, 1.0}));
    REQUIRE(c2.size() == 8);
    CHECK(c2[0].box.hi[0] - c2[0].box.lo[0] == doctest::Approx(0.25));
    CHECK(c2[0].box.hi[1] - c2[0].box.lo[1] == doctest::Approx(0.5));
  }
  SUBCASE("clipped last cell is kept") {
    const auto c = dyadic_cells(Box{{0}, {0.6}}, 1, HurstVector{0.5});
    REQUIRE(c.size() == 3);
    CHECK(c.back().box.hi[0] - c.back().box.lo[0] == doctest::Approx(0.1));
  }
  SUBCASE("empty box and bad order") {
    CHECK(dyadic_cells(Box{{0}, {0}}, 2, HurstVector{0.5}).empty());
    CHECK_THROWS_AS(dyadic_cells(Box{{0}, {1}}, -1, HurstVector{0.5}), InvalidArgument);
  }
  SUBCASE("tiling, rho_tilde diameter and growth") {
    const HurstVector H{0.4, 0.7};
    const Box T{{0, -1}, {1.3, 0.5}};
    double prev = 0.0;
    for (int q = 0; q <= 6; ++q) {
      const auto cells = dyadic_cells(T, q, H);
      long double vol = 0.0;  // ~1e7 cells at q = 6
      for (const auto& c : cells) {
        vol += c.box.volume();
        REQUIRE(rho_tilde(c.box.lo, c.box.hi, H) <= std::exp2(-q) * (1 + 1e-12));
      }
      CHECK(static_cast<double>(vol) == doctest::Approx(T.volume()).epsilon(1e-10));
      if (q >= 3) {
        // count(q)/count(q-1) approaches 2^Q, up to clipped boundary cells
        const double ratio = static_cast<double>(cells.size()) / prev;
        CHECK(std::abs(std::log2(ratio) - H.q()) < 0.5);
      }
      prev = static_cast<double>(cells.size());
    }
  }
}

TEST_CASE("box helpers") {
  const Box b{{0, 1}, {2, 3}};
  CHECK(b.volume() == 4.0);
  CHECK(b.center() == Point{1, 2});
  CHECK(b.contains(Point{2, 3}));
  CHECK_FALSE(b.contains(Point{2.1, 3}));
  CHECK(Box{{0}, {0}}.empty());
  CHECK(Box{{0}, {0}}.volume() == 0.0);
  CHECK(to_string(HurstVector{0.5, 0.25}) == "0.5,0.25");
}
