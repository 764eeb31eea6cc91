#include <benchmark/benchmark.h>

#include "ambench/geom.hpp"
#include "ambench/rng.hpp"

using namespace ambench;

namespace {

geom::PointSet random_cloud(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  geom::PointSet cloud(n);
  for (auto& p : cloud)
    p = {rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4), rng.uniform(0.0, 0.4)};
  return cloud;
}

}  // namespace

static void BM_FpsDownsample(benchmark::State& state) {
  const auto cloud = random_cloud(state.range(0), 1);
  for (auto _ : state)
    benchmark::DoNotOptimize(geom::fps_downsample(cloud, state.range(0) / 4, 0));
}
BENCHMARK(BM_FpsDownsample)->Arg(1024)->Arg(4096);

static void BM_Dbscan(benchmark::State& state) {
  const auto cloud = random_cloud(state.range(0), 2);
  for (auto _ : state) benchmark::DoNotOptimize(geom::dbscan(cloud, 0.1, 1));
}
BENCHMARK(BM_Dbscan)->Arg(1000)->Arg(4000);

static void BM_Chamfer(benchmark::State& state) {
  const auto a = random_cloud(state.range(0), 3);
  const auto b = random_cloud(state.range(0), 4);
  for (auto _ : state) benchmark::DoNotOptimize(geom::chamfer_distance(a, b));
}
BENCHMARK(BM_Chamfer)->Arg(256)->Arg(1024);

static void BM_DilateMask(benchmark::State& state) {
  Rng rng(5);
  geom::Mask2D mask(96, 72);
  for (auto& v : mask.values) v = rng.uniform() < 0.05 ? 1 : 0;
  for (auto _ : state) benchmark::DoNotOptimize(geom::dilate_mask(mask, 2));
}
BENCHMARK(BM_DilateMask);
