#include <cmath>
#include <memory>
#include <random>

#include "anisolt/sampler.hpp"
#include "doctest.h"

using namespace anisolt;

namespace {

std::shared_ptr<const Grid> line_grid(long n, Grid::Placement p = Grid::Placement::upper) {
  return std::make_shared<const Grid>(Grid::product(Box{{0.0}, {1.0}}, {n}, p));
}

// sample covariance of columns 0 of many draws at grid points i, j
double empirical_cov(const GaussianSampler& s, std::size_t i, std::size_t j, int reps) {
  double acc = 0.0;
  for (int r = 0; r < reps; ++r) {
    const FieldSample f = s.draw(99, static_cast<std::uint64_t>(r));
    acc += f.values(static_cast<Eigen::Index>(i), 0) * f.values(static_cast<Eigen::Index>(j), 0);
  }
  return acc / reps;
}

}  // namespace

TEST_CASE("product grid") {
  const Grid g = Grid::product(Box{{0, 0}, {1, 3}}, {2, 3});
  REQUIRE(g.size() == 6);
  CHECK(g.dim() == 2);
  CHECK(g.total_weight() == doctest::Approx(3.0));
  for (double w : g.weights) CHECK(w == doctest::Approx(0.5));
  CHECK(g.points.front() == Point{0.25, 0.5});
  const Grid u = Grid::product(Box{{0}, {1}}, {4}, Grid::Placement::upper);
  CHECK(u.points.back() == Point{1.0});
  CHECK(u.points.front() == Point{0.25});
  CHECK_FALSE(g.spec.empty());
  CHECK_THROWS_AS(Grid::product(Box{{0, 0}, {1, 1}}, {2}), InvalidArgument);
  CHECK_THROWS_AS(Grid::product(Box{{0}, {1}}, {0}), InvalidArgument);
  CHECK_THROWS_AS(Grid::product(Box{{1}, {1}}, {3}), InvalidArgument);
}

TEST_CASE("jittered cholesky") {
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(5, 5);
  const auto c = jittered_cholesky(I);
  CHECK(c.lambda == 1e-12);  // smallest step is always applied
  CHECK((c.L - I).norm() < 1e-11);

  // rank one: needs jitter
  const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(4, 4);
  const auto j = jittered_cholesky(ones);
  CHECK(j.lambda > 0.0);
  CHECK(j.lambda <= 1e-8);
  CHECK((j.L * j.L.transpose() - ones).norm() < 1e-6);

  Eigen::MatrixXd bad = -Eigen::MatrixXd::Identity(3, 3);
  CHECK_THROWS_AS(jittered_cholesky(bad), FactorizationError);
  bad = Eigen::MatrixXd::Identity(3, 3);
  bad(2, 2) = -1.0;
  try {
    jittered_cholesky(bad);
    FAIL("expected FactorizationError");
  } catch (const FactorizationError& e) {
    CHECK(e.leading_minor() == 3);
  }
}

TEST_CASE("brownian fast path matches min(s,t)") {
  const auto g = line_grid(8);
  const auto bm = CovarianceModel::fbm(HurstVector{0.5}, Box{{0}, {1}});
  const GaussianSampler s(bm, g);
  CHECK(s.brownian_path());
  const int reps = 40000;
  for (auto [i, j] : {std::pair{0, 0}, {1, 5}, {7, 7}, {3, 6}}) {
    const double t = g->points[i][0], u = g->points[j][0];
    // se of a product of unit-scale normals is ~ sqrt(2)/sqrt(reps)
    CHECK(std::abs(empirical_cov(s, i, j, reps) - std::min(t, u)) < 5.0 * std::sqrt(2.0 / reps));
  }
  // a point at t = 0 disables the fast path
  const auto g0 = line_grid(8, Grid::Placement::center);
  auto pts = *g0;
  pts.points[0][0] = 0.0;
  CHECK_FALSE(GaussianSampler(bm, std::make_shared<const Grid>(pts)).brownian_path());
  CHECK(GaussianSampler(bm, g0).brownian_path());
}

TEST_CASE("dense factor matches fbm covariance") {
  const auto g = line_grid(6);
  const double H = 0.3;
  const auto m = CovarianceModel::fbm(HurstVector{H}, Box{{0}, {1}});
  const GaussianSampler s(m, g);
  CHECK_FALSE(s.brownian_path());
  const int reps = 40000;
  for (auto [i, j] : {std::pair{0, 0}, {1, 4}, {5, 5}, {2, 3}}) {
    const double t = g->points[i][0], u = g->points[j][0];
    const double oracle = 0.5 * (std::pow(t, 2 * H) + std::pow(u, 2 * H) - std::pow(std::abs(t - u), 2 * H));
    CHECK(std::abs(empirical_cov(s, i, j, reps) - oracle) < 5.0 * std::sqrt(2.0 / reps));
  }
}

TEST_CASE("draws are deterministic per substream") {
  const auto g = std::make_shared<const Grid>(Grid::product(Box{{0, 0}, {1, 1}}, {4, 4}, Grid::Placement::upper));
  const auto m = CovarianceModel::fbm(HurstVector{0.4, 0.6}, Box{{0, 0}, {1, 1}});
  const GaussianSampler s(m, g);
  const auto a = s.draw(7, 3, 2), b = s.draw(7, 3, 2), c = s.draw(7, 4, 2), d = s.draw(8, 3, 2);
  CHECK(a.values == b.values);
  CHECK(a.values != c.values);
  CHECK(a.values != d.values);
  CHECK(a.components() == 2);
  CHECK(a.replicate == 3);
  CHECK(sample(m, *g, 2, 7).values.rows() == 16);
  CHECK_THROWS_AS(s.draw(7, 3, 0), InvalidArgument);
  CHECK_THROWS_AS(GaussianSampler(m, line_grid(4)), InvalidArgument);
  CHECK_THROWS_AS(GaussianSampler(m, std::make_shared<const Grid>()), InvalidArgument);
}

TEST_CASE("transformed draws are U A^T") {
  const auto g = line_grid(16);
  const auto inner = CovarianceModel::fbm(HurstVector{0.5}, Box{{0}, {1}});
  Eigen::MatrixXd A(2, 2);
  A << 1.0, 0.5, 0.0, 2.0;
  const auto tm = CovarianceModel::transformed(A, inner);
  const auto v = GaussianSampler(tm, g).draw(5, 1, 1);  // d forced to 2
  const auto u = GaussianSampler(inner, g).draw(5, 1, 2);
  REQUIRE(v.components() == 2);
  CHECK((v.values - u.values * A.transpose()).norm() < 1e-12);
}

TEST_CASE("conditional variance") {
  const auto bm = CovarianceModel::fbm(HurstVector{0.5}, Box{{0}, {1}});
  // Brownian bridge: Var(B_t | B_s, B_u) = (t-s)(u-t)/(u-s)
  const double s = 0.2, t = 0.5, u = 0.9;
  auto cv = conditional_variance(bm, Point{t}, {Point{s}, Point{u}});
  CHECK(cv.variance == doctest::Approx((t - s) * (u - t) / (u - s)).epsilon(1e-10));
  CHECK_FALSE(cv.flagged);
  // Markov: an earlier point changes nothing
  cv = conditional_variance(bm, Point{t}, {Point{0.1}, Point{s}, Point{u}});
  CHECK(cv.variance == doctest::Approx((t - s) * (u - t) / (u - s)).epsilon(1e-10));
  // past only
  CHECK(conditional_variance(bm, Point{t}, {Point{s}}).variance == doctest::Approx(t - s));
  CHECK(conditional_variance(bm, Point{t}, {}).variance == doctest::Approx(t));
  // nearly coincident conditioners
  CHECK_THROWS_AS(conditional_variance(bm, Point{t}, {Point{s}, Point{s + 1e-15}}), SingularMatrixError);
}

TEST_CASE("slnd scan") {
  const auto m = CovarianceModel::fbm(HurstVector{0.3, 0.7}, Box{{0, 0}, {1, 1}});
  const Box dom{{0.1, 0.1}, {1, 1}};
  const HurstVector H = m.induced_hurst();
  const auto a = slnd_scan(m, dom, H, 60, 4, 3, 1);
  const auto b = slnd_scan(m, dom, H, 120, 4, 3, 3);
  REQUIRE(a.ratios.size() == 60);
  for (std::size_t k = 0; k < 60; ++k) {
    if (std::isnan(a.ratios[k])) {
      CHECK(std::isnan(b.ratios[k]));
    } else {
      CHECK(a.ratios[k] == b.ratios[k]);
    }
    CHECK(a.sizes[k] == b.sizes[k]);
    CHECK(a.sizes[k] >= 1);
    CHECK(a.sizes[k] <= 4);
  }
  CHECK(a.min_ratio > 0.0);
  CHECK(b.min_ratio <= a.min_ratio);
  CHECK(a.min_ratio_origin <= a.min_ratio);
  const auto c = slnd_scan(m, dom, H, 60, 4, 3, 4);
  CHECK(c.min_ratio == a.min_ratio);
  CHECK_THROWS_AS(slnd_scan(m, dom, HurstVector{0.5, 0.5}, 10, 4, 3), InvalidArgument);
  CHECK_THROWS_AS(slnd_scan(m, dom, H, 10, 0, 3), InvalidArgument);
  CHECK_THROWS_AS(slnd_scan(m, Box{{0}, {1}}, H, 10, 2, 3), InvalidArgument);
}

TEST_CASE("slnd ratio against the bridge") {
  const auto bm = CovarianceModel::fbm(HurstVector{0.5}, Box{{0}, {1}});
  const auto r = slnd_ratio(bm, HurstVector{0.5}, Point{0.5}, {Point{0.4}, Point{0.7}});
  REQUIRE(r.ratio.has_value());
  // condVar = 0.1*0.2/0.3, nearest rho^2 = |0.1|
  CHECK(*r.ratio == doctest::Approx((0.1 * 0.2 / 0.3) / 0.1));
  const auto none = slnd_ratio(bm, HurstVector{0.5}, Point{0.5}, {});
  CHECK_FALSE(none.ratio.has_value());
  CHECK(none.ratio_origin == doctest::Approx(1.0));
}

TEST_CASE("field sample csv") {
  const auto g = std::make_shared<const Grid>(Grid::product(Box{{0, 0}, {1, 2}}, {3, 2}));
  const auto m = CovarianceModel::fbm(HurstVector{0.5, 0.25}, Box{{0, 0}, {1, 2}});
  const auto f = GaussianSampler(m, g).draw(11, 2, 3);
  const std::string text = write_field_sample_csv(f);
  const auto back = read_field_sample_csv(text);
  CHECK(back.values == f.values);
  CHECK(back.grid->points == g->points);
  CHECK(back.grid->weights == g->weights);
  CHECK(back.seed == 11);
  CHECK(back.replicate == 2);
  CHECK(back.model == f.model);
  CHECK(write_field_sample_csv(back) == text);

  CHECK_THROWS_AS(read_field_sample_csv("# seed=1\n"), InvalidArgument);
  CHECK_THROWS_AS(read_field_sample_csv("# weights=uniform:1\nindex,t0,x0\n0,0.5\n"), InvalidArgument);
  CHECK_THROWS_AS(read_field_sample_csv("# weights=1,2\nindex,t0,x0\n0,0.5,1\n"), InvalidArgument);
  CHECK_THROWS(read_field_sample_csv("# weights=uniform:1\nindex,t0,x0\n0,abc,1\n"));
}

namespace {

std::vector<Point> random_in(const Box& dom, std::size_t n, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<Point> pts(n, Point(dom.dim()));
  for (auto& p : pts) {
    for (std::size_t j = 0; j < p.size(); ++j) p[j] = dom.lo[j] + (dom.hi[j] - dom.lo[j]) * U(gen);
  }
  return pts;
}

}  // namespace

TEST_CASE("conditional variance: nested monotonicity and the determinant product") {
  const std::vector<CovarianceModel> models{
      CovarianceModel::fbm(HurstVector{0.3, 0.8}, Box{{0, 0}, {1, 1}}),
      CovarianceModel::she_white(Box{{1, -1}, {2, 1}}),
  };
  std::mt19937_64 gen(14);
  for (const auto& m : models) {
    CAPTURE(m.kind_name());
    for (int trial = 0; trial < 20; ++trial) {
      const auto pts = random_in(m.domain(), 9, gen);
      const Point t = pts.back();
      std::vector<Point> cond;
      double prev = m.variance(t).value;
      for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        cond.push_back(pts[k]);
        const double v = conditional_variance(m, t, cond).variance;
        CHECK(v <= prev * (1 + 1e-10));
        prev = v;
      }
      // det K(t^1..t^n) = prod_k Var(Y(t^k) | Y(t^1..t^{k-1})), n = 8
      const std::vector<Point> eight(pts.begin(), pts.begin() + 8);
      double prod = 1.0;
      for (std::size_t k = 0; k < eight.size(); ++k) {
        prod *= conditional_variance(m, eight[k], std::vector<Point>(eight.begin(), eight.begin() + k)).variance;
      }
      const double det = gram_matrix(m, eight).K.determinant();
      CHECK(prod == doctest::Approx(det).epsilon(1e-8));
    }
  }
}

TEST_CASE("independent components are uncorrelated") {
  const auto m = CovarianceModel::fbm(HurstVector{0.4, 0.6}, Box{{0, 0}, {1, 1}});
  auto g = std::make_shared<const Grid>(Grid::product(Box{{0, 0}, {1, 1}}, {4, 4}, Grid::Placement::upper));
  const GaussianSampler s(m, g);
  const int reps = 4000;
  Eigen::MatrixXd a(reps, 16), b(reps, 16);
  for (int r = 0; r < reps; ++r) {
    const auto f = s.draw(31, static_cast<std::uint64_t>(r), 2);
    a.row(r) = f.values.col(0).transpose();
    b.row(r) = f.values.col(1).transpose();
  }
  for (int i : {0, 5, 15}) {
    const Eigen::VectorXd x = a.col(i).array() - a.col(i).mean();
    const Eigen::VectorXd y = b.col(i).array() - b.col(i).mean();
    const double corr = x.dot(y) / std::sqrt(x.squaredNorm() * y.squaredNorm());
    CHECK(std::abs(corr) <= 4.0 / std::sqrt(reps));
  }
}
