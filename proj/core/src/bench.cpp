#include "ambench/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>

#include <nlohmann/json.hpp>

#include "ambench/rng.hpp"

namespace ambench::bench {

using ordered_json = nlohmann::ordered_json;
using sim::Scene;
using sim::Task;

namespace {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, std::uint64_t salt) {
  std::uint64_t state = master ^ (salt * 0x9e3779b97f4a7c15ULL) ^ (index + 1);
  return splitmix64(state);
}

}  // namespace

BenchReport run_attention_benchmark(const BenchConfig& config) {
  if (config.episodes < 1) throw Error("bench: episode count must be >= 1");
  if (!(config.chamfer_threshold >= 0.0)) throw Error("bench: chamfer threshold must be >= 0");

  BenchReport report;
  report.task = config.task;
  report.total = config.episodes;
  const auto refs = sim::reference_features(config.render);

  if (!config.dump_dir.empty()) std::filesystem::create_directories(config.dump_dir);

  for (int ep = 0; ep < config.episodes; ++ep) {
    const std::uint64_t scene_seed = derive_seed(config.seed, ep, 0x5ce2e);
    EpisodeRow row;
    row.scene_seed = scene_seed;
    try {
      const Scene scene = sim::gen_scene(config.task, scene_seed, config.scene);
      Rng rng(derive_seed(config.seed, ep, 0x1257));
      const auto instruction =
          lang::sample_instruction(config.task, scene, rng, config.instruction);
      row.text = instruction.text;

      const auto cloud = sim::render_feature_cloud(scene, config.noise_sigma,
                                                   derive_seed(config.seed, ep, 0xc10d),
                                                   config.render);
      const auto program = ground::compile_program(instruction);
      const ground::AttributeOracle oracle(scene);
      const auto result = ground::run_program(program, cloud, refs, oracle,
                                              derive_seed(config.seed, ep, 0xa27),
                                              config.grounding);
      const auto attention = ground::build_attention(cloud, result.pick, result.place);

      // slack roles score against the pipeline's own pick when it is valid
      const auto targets = lang::extract_targets(scene, instruction);
      auto resolve = [](const std::vector<int>& ids, int chosen) {
        if (std::find(ids.begin(), ids.end(), chosen) != ids.end()) return chosen;
        return ids.at(0);
      };
      const int gt_pick = resolve(targets.pick_ids, result.pick.majority_instance);
      const int gt_place = resolve(targets.place_ids, result.place.majority_instance);

      geom::PointSet gt_points;
      for (std::size_t i = 0; i < cloud.size(); ++i)
        if (cloud.gt_instance[i] == gt_pick || cloud.gt_instance[i] == gt_place)
          gt_points.push_back(cloud.points[i]);

      const auto generated = ground::attention_points(cloud, attention);
      row.chamfer = geom::chamfer_distance(generated, gt_points, config.chamfer_variant);
      row.pass = row.chamfer <= config.chamfer_threshold;
      if (!row.pass) row.failure = FailStage::perception;

      if (!config.dump_dir.empty()) {
        const auto stem = config.dump_dir + "/episode_" + std::to_string(ep);
        sim::write_fcd(stem + ".fcd", cloud);
        ground::write_att(stem + ".att", attention);
      }
    } catch (const Error& e) {
      row.pass = false;
      row.failure = e.stage() == FailStage::none ? FailStage::perception : e.stage();
    }
    if (row.pass) {
      ++report.successes;
    } else {
      switch (row.failure) {
        case FailStage::codegen: ++report.fail_codegen; break;
        case FailStage::execution: ++report.fail_execution; break;
        default: ++report.fail_perception; break;
      }
    }
    report.episodes.push_back(std::move(row));
  }
  return report;
}

std::string report_to_json(const BenchReport& report) {
  ordered_json j;
  j["task"] = sim::to_string(report.task);
  j["successes"] = report.successes;
  j["total"] = report.total;
  j["failures"] = {{"codegen", report.fail_codegen},
                   {"perception", report.fail_perception},
                   {"execution", report.fail_execution}};
  j["episodes"] = ordered_json::array();
  for (const auto& row : report.episodes) {
    ordered_json e;
    e["seed"] = row.scene_seed;
    e["text"] = row.text;
    if (std::isnan(row.chamfer)) {
      e["chamfer"] = nullptr;
    } else {
      e["chamfer"] = row.chamfer;
    }
    e["pass"] = row.pass;
    j["episodes"].push_back(e);
  }
  return j.dump(2) + "\n";
}

policy::DemoDataset generate_demos(const DemoGenConfig& config) {
  if (config.count < 1) throw Error("empty dataset");
  policy::DemoDataset dataset;
  dataset.horizon = config.horizon;

  for (int i = 0; i < config.count; ++i) {
    const std::uint64_t scene_seed = derive_seed(config.seed, i, 0xde305);
    auto scene = std::make_shared<const Scene>(
        sim::gen_scene(config.task, scene_seed, config.scene));
    Rng rng(derive_seed(config.seed, i, 0x9a12));

    const auto picks = scene->graspable_ids();
    const auto places = scene->place_ids();
    const int pick = picks[rng.index(picks.size())];
    const int place = places[rng.index(places.size())];

    const auto demo = sim::scripted_demo(*scene, pick, place, config.env);
    std::optional<std::vector<geom::Camera>> rig;
    if (config.with_grid) rig = policy::default_camera_rig();
    policy::ObservationSampler sampler(scene, config.obs, rig ? &*rig : nullptr);

    sim::EnvState state = sim::make_env(scene, config.env);
    const int n = static_cast<int>(demo.actions.size());
    const int obs_pick = config.attended_obs ? pick : -1;
    const int obs_place = config.attended_obs ? place : -1;
    for (int t = 0; t < n; ++t) {
      if (t % config.record_stride == 0) {
        const auto obs = sampler.observe(state, obs_pick, obs_place, config.with_grid);
        policy::DemoRecord rec;
        rec.points = obs.points;
        rec.grid = obs.grid;
        rec.proprio = obs.proprio;
        rec.action.resize(config.horizon * 4);
        for (int h = 0; h < config.horizon; ++h) {
          const auto& a = demo.actions[std::min(n - 1, t + h)];
          rec.action(4 * h) = static_cast<float>(a.x);
          rec.action(4 * h + 1) = static_cast<float>(a.y);
          rec.action(4 * h + 2) = static_cast<float>(a.z);
          rec.action(4 * h + 3) = static_cast<float>(a.grip);
        }
        dataset.records.push_back(std::move(rec));
      }
      state = sim::step_env(state, demo.actions[t], config.env);
    }
    if (sim::task_reward(state, {{pick, place}}) != 1.0)
      throw Error("generate_demos: scripted demo failed to earn reward");
  }
  dataset.finalize_stats();
  return dataset;
}

void write_demos(const std::string& path, const policy::DemoDataset& dataset) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw Error("cannot open " + path);
  std::fwrite("DEM1", 1, 4, f);
  const std::uint32_t count = static_cast<std::uint32_t>(dataset.records.size());
  const std::uint32_t points = static_cast<std::uint32_t>(dataset.encoder_points);
  const std::uint32_t grid = static_cast<std::uint32_t>(dataset.grid_dim);
  const std::uint32_t horizon = static_cast<std::uint32_t>(dataset.horizon);
  std::fwrite(&count, sizeof(count), 1, f);
  std::fwrite(&points, sizeof(points), 1, f);
  std::fwrite(&grid, sizeof(grid), 1, f);
  std::fwrite(&horizon, sizeof(horizon), 1, f);
  for (const auto& rec : dataset.records) {
    std::fwrite(rec.points.data(), sizeof(float), rec.points.size(), f);
    if (grid) std::fwrite(rec.grid.data(), sizeof(float), rec.grid.size(), f);
    std::fwrite(rec.proprio.data(), sizeof(float), 4, f);
    std::fwrite(rec.action.data(), sizeof(float), rec.action.size(), f);
  }
  std::fclose(f);
}

policy::DemoDataset read_demos(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw Error("cannot open " + path);
  char magic[4];
  std::uint32_t count = 0, points = 0, grid = 0, horizon = 0;
  if (std::fread(magic, 1, 4, f) != 4 || std::memcmp(magic, "DEM1", 4) != 0 ||
      std::fread(&count, sizeof(count), 1, f) != 1 ||
      std::fread(&points, sizeof(points), 1, f) != 1 ||
      std::fread(&grid, sizeof(grid), 1, f) != 1 ||
      std::fread(&horizon, sizeof(horizon), 1, f) != 1) {
    std::fclose(f);
    throw Error("not a DEM1 file");
  }
  policy::DemoDataset dataset;
  dataset.horizon = static_cast<int>(horizon);
  auto read_floats = [&](float* dst, std::size_t n) {
    if (std::fread(dst, sizeof(float), n, f) != n) {
      std::fclose(f);
      throw Error("demos: short read");
    }
  };
  for (std::uint32_t i = 0; i < count; ++i) {
    policy::DemoRecord rec;
    rec.points.resize(points, 4);
    read_floats(rec.points.data(), rec.points.size());
    if (grid) {
      rec.grid.resize(grid);
      read_floats(rec.grid.data(), grid);
    }
    read_floats(rec.proprio.data(), 4);
    rec.action.resize(static_cast<Eigen::Index>(horizon) * 4);
    read_floats(rec.action.data(), rec.action.size());
    dataset.records.push_back(std::move(rec));
  }
  std::fclose(f);
  dataset.finalize_stats();
  return dataset;
}

EvalReport evaluate_policy(const policy::NoiseNet& net, const policy::NormStats& stats,
                           const policy::NoiseSchedule& schedule, const EvalConfig& config) {
  EvalReport report;
  report.task = config.task;
  report.total = config.episodes;
  for (int ep = 0; ep < config.episodes; ++ep) {
    const std::uint64_t scene_seed = derive_seed(config.seed, ep, 0xeba1);
    const Scene scene = sim::gen_scene(config.task, scene_seed, config.scene);
    Rng rng(derive_seed(config.seed, ep, 0x90ff));

    const auto picks = scene.graspable_ids();
    const auto places = scene.place_ids();
    const std::pair<int, int> attended{picks[rng.index(picks.size())],
                                       places[rng.index(places.size())]};
    std::vector<std::pair<int, int>> allowed;
    if (config.attended_scoring) {
      allowed = {attended};
    } else {
      for (int p : picks)
        for (int q : places) allowed.emplace_back(p, q);
    }

    const auto result = policy::rollout(net, stats, schedule, scene, attended, allowed,
                                        config.obs, config.rollout, rng, config.env);
    report.outcomes.push_back(result.success ? 1 : 0);
    if (result.success) {
      ++report.successes;
    } else {
      switch (result.stage) {
        case policy::FailureStage::pick: ++report.fail_pick; break;
        case policy::FailureStage::place: ++report.fail_place; break;
        default: ++report.fail_timeout; break;
      }
    }
  }
  return report;
}

std::string eval_to_json(const EvalReport& report) {
  ordered_json j;
  j["task"] = sim::to_string(report.task);
  j["successes"] = report.successes;
  j["total"] = report.total;
  j["failures"] = {{"pick", report.fail_pick},
                   {"place", report.fail_place},
                   {"timeout", report.fail_timeout}};
  j["outcomes"] = report.outcomes;
  return j.dump(2) + "\n";
}

namespace {

MatrixCell run_cell(int picks, int places, const MatrixConfig& config) {
  sim::SceneConfig scene_cfg;
  scene_cfg.min_batteries = picks;
  scene_cfg.max_batteries = picks;
  scene_cfg.occupied_slots = 12 - places;

  DemoGenConfig demo_cfg;
  demo_cfg.task = Task::pack_battery;
  demo_cfg.count = config.demos_per_cell;
  demo_cfg.seed = derive_seed(config.seed, static_cast<std::uint64_t>(picks) * 100 + places,
                              0xce11);
  demo_cfg.scene = scene_cfg;
  demo_cfg.obs = config.obs;
  demo_cfg.horizon = config.horizon;
  demo_cfg.record_stride = config.record_stride;
  demo_cfg.with_grid = config.train.mode == policy::InputMode::attn2d;
  demo_cfg.attended_obs = config.train.mode != policy::InputMode::none;

  const auto dataset = generate_demos(demo_cfg);
  auto train_cfg = config.train;
  train_cfg.seed = demo_cfg.seed ^ 0x7e57;
  const auto trained = policy::train(dataset, train_cfg);

  EvalConfig eval_cfg;
  eval_cfg.task = Task::pack_battery;
  eval_cfg.episodes = config.rollouts;
  eval_cfg.seed = demo_cfg.seed ^ 0xeba7;
  eval_cfg.scene = scene_cfg;
  eval_cfg.obs = config.obs;
  eval_cfg.rollout = config.rollout;
  eval_cfg.attended_scoring = config.train.mode != policy::InputMode::none;
  const auto eval = evaluate_policy(trained.net, trained.stats, trained.schedule, eval_cfg);

  MatrixCell cell;
  cell.picks = picks;
  cell.places = places;
  cell.outcomes = eval.outcomes;
  cell.rate = eval.total ? static_cast<double>(eval.successes) / eval.total : 0.0;
  const auto ci = bootstrap_ci(eval.outcomes, 2000, eval_cfg.seed ^ 0xb007);
  cell.ci_lo = ci.first;
  cell.ci_hi = ci.second;
  return cell;
}

}  // namespace

std::vector<MatrixCell> run_ambiguity_matrix(const MatrixConfig& config) {
  std::vector<MatrixCell> cells;
  for (int picks : config.picks)
    for (int places : config.places) cells.push_back(run_cell(picks, places, config));
  return cells;
}

std::string matrix_to_csv(const std::vector<MatrixCell>& cells) {
  std::string out = "picks,places,rate,ci_lo,ci_hi\n";
  char line[128];
  for (const auto& cell : cells) {
    std::snprintf(line, sizeof(line), "%d,%d,%.6g,%.6g,%.6g\n", cell.picks, cell.places,
                  cell.rate, cell.ci_lo, cell.ci_hi);
    out += line;
  }
  return out;
}

std::vector<CurvePoint> run_scaling_curve(const CurveConfig& config) {
  if (config.demo_counts.empty()) throw Error("scaling curve: no demo counts");
  const int max_count = *std::max_element(config.demo_counts.begin(), config.demo_counts.end());
  if (max_count < 1) throw Error("empty dataset");

  sim::SceneConfig scene_cfg;
  scene_cfg.min_batteries = config.min_picks;
  scene_cfg.max_batteries = config.max_picks;
  scene_cfg.occupied_slots = 11;  // one placing option

  DemoGenConfig demo_cfg;
  demo_cfg.task = Task::pack_battery;
  demo_cfg.count = max_count;
  demo_cfg.seed = derive_seed(config.seed, 0, 0xcafe);
  demo_cfg.scene = scene_cfg;
  demo_cfg.obs = config.obs;
  demo_cfg.horizon = config.horizon;
  demo_cfg.record_stride = config.record_stride;
  demo_cfg.with_grid = config.train.mode == policy::InputMode::attn2d;
  demo_cfg.attended_obs = config.train.mode != policy::InputMode::none;
  const auto pool = generate_demos(demo_cfg);

  // records arrive demo by demo; prefix by record share
  std::vector<CurvePoint> points;
  for (int count : config.demo_counts) {
    if (count < 1) throw Error("empty dataset");
    policy::DemoDataset subset;
    subset.horizon = pool.horizon;
    const std::size_t take =
        pool.records.size() * static_cast<std::size_t>(count) / max_count;
    subset.records.assign(pool.records.begin(), pool.records.begin() + take);
    subset.finalize_stats();

    auto train_cfg = config.train;
    train_cfg.seed = derive_seed(config.seed, count, 0x7a11);
    const auto trained = policy::train(subset, train_cfg);

    EvalConfig eval_cfg;
    eval_cfg.task = Task::pack_battery;
    eval_cfg.episodes = config.rollouts;
    eval_cfg.seed = derive_seed(config.seed, count, 0xe0a1);
    eval_cfg.scene = scene_cfg;
    eval_cfg.obs = config.obs;
    eval_cfg.rollout = config.rollout;
    eval_cfg.attended_scoring = config.train.mode != policy::InputMode::none;
    const auto eval = evaluate_policy(trained.net, trained.stats, trained.schedule, eval_cfg);

    CurvePoint point;
    point.demos = count;
    point.outcomes = eval.outcomes;
    point.rate = eval.total ? static_cast<double>(eval.successes) / eval.total : 0.0;
    const auto ci = bootstrap_ci(eval.outcomes, 2000, eval_cfg.seed ^ 0xb007);
    point.ci_lo = ci.first;
    point.ci_hi = ci.second;
    points.push_back(std::move(point));
  }
  return points;
}

std::string curve_to_csv(const std::vector<CurvePoint>& points) {
  std::string out = "demos,rate,ci_lo,ci_hi\n";
  char line[128];
  for (const auto& point : points) {
    std::snprintf(line, sizeof(line), "%d,%.6g,%.6g,%.6g\n", point.demos, point.rate,
                  point.ci_lo, point.ci_hi);
    out += line;
  }
  return out;
}

std::pair<double, double> bootstrap_ci(const std::vector<std::uint8_t>& outcomes, int resamples,
                                       std::uint64_t seed) {
  if (outcomes.empty()) return {0.0, 0.0};
  Rng rng(seed);
  std::vector<double> means(resamples);
  for (int r = 0; r < resamples; ++r) {
    int sum = 0;
    for (std::size_t i = 0; i < outcomes.size(); ++i) sum += outcomes[rng.index(outcomes.size())];
    means[r] = static_cast<double>(sum) / outcomes.size();
  }
  std::sort(means.begin(), means.end());
  const auto at = [&](double q) {
    return means[static_cast<std::size_t>(q * (resamples - 1))];
  };
  return {at(0.025), at(0.975)};
}

double bootstrap_prob_greater(const std::vector<std::uint8_t>& a,
                              const std::vector<std::uint8_t>& b, int resamples,
                              std::uint64_t seed) {
  if (a.empty() || b.empty()) return 0.0;
  Rng rng(seed);
  int wins = 0;
  for (int r = 0; r < resamples; ++r) {
    double mean_a = 0.0, mean_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) mean_a += a[rng.index(a.size())];
    for (std::size_t i = 0; i < b.size(); ++i) mean_b += b[rng.index(b.size())];
    if (mean_a / a.size() > mean_b / b.size()) ++wins;
  }
  return static_cast<double>(wins) / resamples;
}

}  // namespace ambench::bench
