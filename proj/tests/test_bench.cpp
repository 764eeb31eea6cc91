#include <doctest.h>

#include <nlohmann/json.hpp>

#include "ambench/bench.hpp"

using namespace ambench;
using bench::BenchConfig;
using sim::Task;

TEST_CASE("noise-free benchmark episodes all pass") {
  BenchConfig cfg;
  cfg.task = Task::hang_mug;
  cfg.episodes = 12;
  cfg.seed = 5;
  const auto report = bench::run_attention_benchmark(cfg);
  CHECK(report.successes == 12);
  CHECK(report.total == 12);
  for (const auto& row : report.episodes) {
    CHECK(row.pass);
    CHECK(row.chamfer == 0.0);
    CHECK(!row.text.empty());
  }
}

TEST_CASE("a zero threshold with noisy features fails closed") {
  BenchConfig cfg;
  cfg.task = Task::pack_battery;
  cfg.episodes = 8;
  cfg.seed = 2;
  cfg.noise_sigma = 0.3;     // heavy noise: some points cross category references
  cfg.chamfer_threshold = 0.0;
  cfg.grounding.sim_threshold = 0.95;  // make detection actually lossy
  const auto report = bench::run_attention_benchmark(cfg);
  CHECK(report.successes < report.total);
}

TEST_CASE("failure taxonomy is exhaustive and counts match the rows") {
  BenchConfig cfg;
  cfg.task = Task::pack_battery;
  cfg.episodes = 10;
  cfg.seed = 3;
  cfg.noise_sigma = 0.2;
  cfg.chamfer_threshold = 1e-9;
  const auto report = bench::run_attention_benchmark(cfg);
  int failures = 0, recount = 0;
  for (const auto& row : report.episodes) {
    if (!row.pass) ++failures;
    if (row.pass) ++recount;
  }
  CHECK(recount == report.successes);
  CHECK(failures == report.fail_codegen + report.fail_perception + report.fail_execution);
  CHECK(report.total == static_cast<int>(report.episodes.size()));
}

TEST_CASE("benchmark reports are byte-identical across reruns") {
  BenchConfig cfg;
  cfg.task = Task::hang_mug;
  cfg.episodes = 6;
  cfg.seed = 11;
  cfg.noise_sigma = 0.05;
  const auto a = bench::report_to_json(bench::run_attention_benchmark(cfg));
  const auto b = bench::report_to_json(bench::run_attention_benchmark(cfg));
  CHECK(a == b);
  const auto j = nlohmann::json::parse(a);
  CHECK(j.contains("task"));
  CHECK(j.contains("successes"));
  CHECK(j.contains("total"));
  CHECK(j["failures"].contains("codegen"));
  CHECK(j["failures"].contains("perception"));
  CHECK(j["failures"].contains("execution"));
  CHECK(j["episodes"].is_array());
  CHECK(j["episodes"][0].contains("seed"));
  CHECK(j["episodes"][0].contains("text"));
  CHECK(j["episodes"][0].contains("chamfer"));
  CHECK(j["episodes"][0].contains("pass"));
}

TEST_CASE("demo datasets replay into records with the configured shape") {
  bench::DemoGenConfig cfg;
  cfg.task = Task::hang_mug;
  cfg.count = 3;
  cfg.seed = 17;
  cfg.obs.encoder_points = 64;
  cfg.obs.samples_per_object = 40;
  cfg.record_stride = 10;
  const auto dataset = bench::generate_demos(cfg);
  CHECK(!dataset.records.empty());
  CHECK(dataset.encoder_points == 64);
  for (const auto& rec : dataset.records) {
    CHECK(rec.points.rows() == 64);
    CHECK(rec.points.cols() == 4);
    CHECK(rec.action.size() == 16 * 4);
  }
}

TEST_CASE("demo files round trip") {
  bench::DemoGenConfig cfg;
  cfg.task = Task::pack_battery;
  cfg.count = 2;
  cfg.seed = 23;
  cfg.obs.encoder_points = 48;
  cfg.obs.samples_per_object = 40;
  cfg.record_stride = 12;
  const auto dataset = bench::generate_demos(cfg);
  const std::string path = "/tmp/ambench_test_demos.bin";
  bench::write_demos(path, dataset);
  const auto loaded = bench::read_demos(path);
  REQUIRE(loaded.records.size() == dataset.records.size());
  CHECK(loaded.horizon == dataset.horizon);
  for (std::size_t i = 0; i < loaded.records.size(); ++i) {
    CHECK(loaded.records[i].points == dataset.records[i].points);
    CHECK(loaded.records[i].action == dataset.records[i].action);
    CHECK(loaded.records[i].proprio == dataset.records[i].proprio);
  }
  CHECK(loaded.stats.lo == dataset.stats.lo);
}

TEST_CASE("bootstrap confidence intervals bracket the observed rate") {
  std::vector<std::uint8_t> outcomes;
  for (int i = 0; i < 60; ++i) outcomes.push_back(i % 3 == 0 ? 1 : 0);
  const auto [lo, hi] = bench::bootstrap_ci(outcomes, 2000, 9);
  CHECK(lo <= 1.0 / 3);
  CHECK(hi >= 1.0 / 3);
  CHECK(lo > 0.05);
  CHECK(hi < 0.7);

  std::vector<std::uint8_t> strong(40, 1), weak(40, 0);
  weak[0] = 1;
  CHECK(bench::bootstrap_prob_greater(strong, weak, 500, 3) == 1.0);
  CHECK(bench::bootstrap_prob_greater(weak, strong, 500, 3) == 0.0);
}

TEST_CASE("a tiny ambiguity matrix run produces well-formed cells") {
  bench::MatrixConfig cfg;
  cfg.picks = {1};
  cfg.places = {12};
  cfg.demos_per_cell = 2;
  cfg.rollouts = 2;
  cfg.seed = 31;
  cfg.train.epochs = 2;
  cfg.train.denoise_steps = 10;
  cfg.obs.encoder_points = 48;
  cfg.obs.samples_per_object = 30;
  cfg.record_stride = 20;
  const auto cells = bench::run_ambiguity_matrix(cfg);
  REQUIRE(cells.size() == 1);
  CHECK(cells[0].picks == 1);
  CHECK(cells[0].places == 12);
  CHECK(cells[0].rate >= 0.0);
  CHECK(cells[0].rate <= 1.0);
  CHECK(cells[0].ci_lo <= cells[0].rate);
  CHECK(cells[0].ci_hi >= cells[0].rate);
  const auto csv = bench::matrix_to_csv(cells);
  CHECK(csv.rfind("picks,places,rate,ci_lo,ci_hi\n", 0) == 0);
}

TEST_CASE("a tiny scaling curve runs and rejects empty counts") {
  bench::CurveConfig cfg;
  cfg.demo_counts = {2, 4};
  cfg.rollouts = 2;
  cfg.seed = 37;
  cfg.train.epochs = 2;
  cfg.train.denoise_steps = 10;
  cfg.obs.encoder_points = 48;
  cfg.obs.samples_per_object = 30;
  cfg.record_stride = 20;
  const auto points = bench::run_scaling_curve(cfg);
  REQUIRE(points.size() == 2);
  CHECK(points[0].demos == 2);
  CHECK(points[1].demos == 4);
  const auto csv = bench::curve_to_csv(points);
  CHECK(csv.rfind("demos,rate,ci_lo,ci_hi\n", 0) == 0);

  bench::CurveConfig bad = cfg;
  bad.demo_counts = {0};
  CHECK_THROWS_WITH_AS(bench::run_scaling_curve(bad), "empty dataset", Error);
}

TEST_CASE("the 2d-attention and no-residual variants train and roll out") {
  bench::DemoGenConfig demo_cfg;
  demo_cfg.task = Task::pack_battery;
  demo_cfg.count = 2;
  demo_cfg.seed = 53;
  demo_cfg.obs.encoder_points = 48;
  demo_cfg.obs.samples_per_object = 30;
  demo_cfg.record_stride = 16;
  demo_cfg.with_grid = true;
  const auto dataset = bench::generate_demos(demo_cfg);
  REQUIRE(dataset.grid_dim > 0);

  for (const bool residual : {true, false}) {
    policy::TrainConfig train_cfg;
    train_cfg.mode = residual ? policy::InputMode::attn2d : policy::InputMode::attn3d;
    train_cfg.residual = residual;
    train_cfg.epochs = 2;
    train_cfg.denoise_steps = 10;
    const auto trained = policy::train(dataset, train_cfg);
    CHECK(trained.net.parameter_count() < 1000000);

    bench::EvalConfig cfg;
    cfg.task = Task::pack_battery;
    cfg.episodes = 2;
    cfg.seed = 57;
    cfg.obs.encoder_points = 48;
    cfg.obs.samples_per_object = 30;
    cfg.rollout.max_frames = 40;
    const auto report = bench::evaluate_policy(trained.net, trained.stats, trained.schedule, cfg);
    CHECK(report.total == 2);
  }
}

TEST_CASE("policy evaluation classifies failures into pick, place and timeout") {
  // an untrained net fails; every failure lands in exactly one bucket
  bench::DemoGenConfig demo_cfg;
  demo_cfg.task = Task::pack_battery;
  demo_cfg.count = 2;
  demo_cfg.seed = 41;
  demo_cfg.obs.encoder_points = 48;
  demo_cfg.obs.samples_per_object = 30;
  demo_cfg.record_stride = 20;
  const auto dataset = bench::generate_demos(demo_cfg);
  policy::TrainConfig train_cfg;
  train_cfg.epochs = 1;
  train_cfg.denoise_steps = 10;
  const auto trained = policy::train(dataset, train_cfg);

  bench::EvalConfig cfg;
  cfg.task = Task::pack_battery;
  cfg.episodes = 4;
  cfg.seed = 43;
  cfg.obs.encoder_points = 48;
  cfg.obs.samples_per_object = 30;
  cfg.rollout.max_frames = 60;
  const auto report = bench::evaluate_policy(trained.net, trained.stats, trained.schedule, cfg);
  CHECK(report.total == 4);
  CHECK(report.successes + report.fail_pick + report.fail_place + report.fail_timeout == 4);
  CHECK(report.outcomes.size() == 4);
}
