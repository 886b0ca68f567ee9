#include <memory>
#include <random>

#include <benchmark/benchmark.h>

#include "anisolt/covariance.hpp"
#include "anisolt/geometry.hpp"
#include "anisolt/level_set.hpp"
#include "anisolt/local_time.hpp"
#include "anisolt/sampler.hpp"

using namespace anisolt;

namespace {

std::vector<Point> random_points(std::size_t n, std::size_t N, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<Point> pts(n, Point(N));
  for (auto& p : pts)
    for (auto& v : p) v = U(gen);
  return pts;
}

void BM_rho_tilde(benchmark::State& state) {
  const HurstVector H{0.3, 0.6, 0.9};
  const auto pts = random_points(1024, 3, 1);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(rho_tilde(pts[i % 1024], pts[(i + 1) % 1024], H));
    ++i;
  }
}
BENCHMARK(BM_rho_tilde);

void BM_covering_count(benchmark::State& state) {
  const HurstVector H{0.5, 0.5};
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto cfg = covering_configuration(n, H, 1, 1);
  const std::vector<Point> rest(cfg.begin() + 1, cfg.end());
  for (auto _ : state) benchmark::DoNotOptimize(covering_count(cfg.front(), rest, H));
}
BENCHMARK(BM_covering_count)->Arg(50)->Arg(200);

void BM_riesz_kernel(benchmark::State& state) {
  double delta = 0.01;
  for (auto _ : state) {
    benchmark::DoNotOptimize(riesz::kernel(2, 0.5, 0.3, delta));
    delta = delta < 3.0 ? delta * 1.01 : 0.01;
  }
}
BENCHMARK(BM_riesz_kernel);

void BM_dense_sampler_setup(benchmark::State& state) {
  const auto n = state.range(0);
  const auto m = CovarianceModel::fbm(HurstVector{0.5, 0.5}, Box{{0, 0}, {1, 1}});
  auto g = std::make_shared<const Grid>(Grid::product(Box{{0, 0}, {1, 1}}, {n, n}, Grid::Placement::upper));
  for (auto _ : state) benchmark::DoNotOptimize(GaussianSampler(m, g).jitter());
}
BENCHMARK(BM_dense_sampler_setup)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_brownian_draw(benchmark::State& state) {
  const auto m = CovarianceModel::fbm(HurstVector{0.5}, Box{{0}, {1}});
  auto g = std::make_shared<const Grid>(Grid::product(Box{{0}, {1}}, {4096}, Grid::Placement::upper));
  const GaussianSampler s(m, g);
  std::uint64_t r = 0;
  for (auto _ : state) benchmark::DoNotOptimize(s.draw(1, r++).values.data());
}
BENCHMARK(BM_brownian_draw);

void BM_occupation_histogram(benchmark::State& state) {
  const auto m = CovarianceModel::fbm(HurstVector{0.5}, Box{{0}, {1}});
  auto g = std::make_shared<const Grid>(Grid::product(Box{{0}, {1}}, {4096}, Grid::Placement::upper));
  const auto sample = GaussianSampler(m, g).draw(1, 0);
  const auto region = Region::interval(Box{{0}, {1}});
  for (auto _ : state) benchmark::DoNotOptimize(occupation_histogram(sample, region, 0.01).mass.size());
}
BENCHMARK(BM_occupation_histogram);

void BM_extract_level_set(benchmark::State& state) {
  const auto m = CovarianceModel::fbm(HurstVector{0.5}, Box{{0}, {1}});
  auto g = std::make_shared<const Grid>(Grid::product(Box{{0}, {1}}, {16384}, Grid::Placement::upper));
  const auto sample = GaussianSampler(m, g).draw(1, 0);
  const std::vector<int> orders{2, 3, 4, 5, 6};
  for (auto _ : state) {
    benchmark::DoNotOptimize(extract_level_set(sample, Point{0.0}, HurstVector{0.5}, orders).counts.back());
  }
}
BENCHMARK(BM_extract_level_set);

}  // namespace
BENCHMARK_MAIN();
