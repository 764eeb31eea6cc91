#include <benchmark/benchmark.h>

#include "ambench/feature_cloud.hpp"
#include "ambench/grounding.hpp"
#include "ambench/policy.hpp"

using namespace ambench;

static void BM_RenderFeatureCloud(benchmark::State& state) {
  const auto scene = sim::gen_scene(sim::Task::pack_battery, 7);
  for (auto _ : state)
    benchmark::DoNotOptimize(sim::render_feature_cloud(scene, 0.05, 11));
}
BENCHMARK(BM_RenderFeatureCloud);

static void BM_DetectSlots(benchmark::State& state) {
  const auto scene = sim::gen_scene(sim::Task::pack_battery, 7);
  const auto cloud = sim::render_feature_cloud(scene, 0.05, 11);
  const auto ref = sim::reference_feature(sim::Category::slot);
  for (auto _ : state) benchmark::DoNotOptimize(ground::detect(cloud, ref, 0.7, 0.1));
}
BENCHMARK(BM_DetectSlots);

static void BM_EncoderForward(benchmark::State& state) {
  policy::NetConfig cfg;
  Rng rng(3);
  policy::NoiseNet net;
  net.init(cfg, rng);
  policy::MatX<float> points(state.range(0), 4);
  for (Eigen::Index i = 0; i < points.size(); ++i)
    points.data()[i] = static_cast<float>(rng.uniform(-1, 1));
  for (auto _ : state) benchmark::DoNotOptimize(net.encode_single(points));
}
BENCHMARK(BM_EncoderForward)->Arg(256)->Arg(1024);

static void BM_ObserveAndEncode(benchmark::State& state) {
  auto scene = std::make_shared<const sim::Scene>(sim::gen_scene(sim::Task::pack_battery, 9));
  policy::ObsConfig cfg;
  cfg.encoder_points = 256;
  policy::ObservationSampler sampler(scene, cfg);
  const auto env = sim::make_env(scene);
  const int pick = scene->graspable_ids()[0];
  const int place = scene->place_ids()[0];
  for (auto _ : state) benchmark::DoNotOptimize(sampler.observe(env, pick, place));
}
BENCHMARK(BM_ObserveAndEncode);
