#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "ambench/env.hpp"
#include "ambench/error.hpp"
#include "ambench/feature_cloud.hpp"
#include "ambench/grounding.hpp"
#include "ambench/instructions.hpp"
#include "ambench/policy.hpp"
#include "ambench/scene.hpp"

namespace ambench::bench {

struct BenchConfig {
  sim::Task task = sim::Task::pack_battery;
  int episodes = 100;
  std::uint64_t seed = 0;
  double noise_sigma = 0.0;
  double chamfer_threshold = 0.005;
  geom::ChamferVariant chamfer_variant = geom::ChamferVariant::squared;
  ground::GroundingConfig grounding;
  sim::SceneConfig scene;
  sim::RenderConfig render;
  lang::InstructionConfig instruction;
  std::string dump_dir;  // when set, per-episode FCD1/ATT1 dumps
};

struct EpisodeRow {
  std::uint64_t scene_seed = 0;
  std::string text;
  double chamfer = std::numeric_limits<double>::quiet_NaN();
  bool pass = false;
  FailStage failure = FailStage::none;
};

struct BenchReport {
  sim::Task task = sim::Task::pack_battery;
  int successes = 0;
  int total = 0;
  int fail_codegen = 0;
  int fail_perception = 0;
  int fail_execution = 0;
  std::vector<EpisodeRow> episodes;
};

struct DemoGenConfig {
  sim::Task task = sim::Task::pack_battery;
  int count = 100;
  std::uint64_t seed = 0;
  sim::SceneConfig scene;
  policy::ObsConfig obs;
  sim::EnvConfig env;
  int horizon = 16;
  int record_stride = 2;
  bool with_grid = false;
  /// false renders unconditioned observations (no attention channel, no
  /// attention-biased sampling), for training the no-attention variant
  bool attended_obs = true;
};

struct EvalConfig {
  sim::Task task = sim::Task::pack_battery;
  int episodes = 50;
  std::uint64_t seed = 0;
  sim::SceneConfig scene;
  policy::ObsConfig obs;
  policy::RolloutConfig rollout;
  sim::EnvConfig env;
  bool attended_scoring = true;
};

struct EvalReport {
  sim::Task task = sim::Task::pack_battery;
  int successes = 0;
  int total = 0;
  int fail_pick = 0;
  int fail_place = 0;
  int fail_timeout = 0;
  std::vector<std::uint8_t> outcomes;  // per-episode success flags
};

struct MatrixConfig {
  std::vector<int> picks{1, 2, 3, 4};
  std::vector<int> places{1, 2, 3, 4, 12};
  int demos_per_cell = 120;
  int rollouts = 50;
  std::uint64_t seed = 0;
  policy::TrainConfig train{.epochs = 180};
  policy::ObsConfig obs;
  policy::RolloutConfig rollout;
  int horizon = 16;
  int record_stride = 2;
};

struct MatrixCell {
  int picks = 0;
  int places = 0;
  double rate = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::vector<std::uint8_t> outcomes;
};

struct CurveConfig {
  std::vector<int> demo_counts{30, 60, 120, 240, 540};
  int rollouts = 50;
  std::uint64_t seed = 0;
  int min_picks = 1;
  int max_picks = 4;  // mixture of picking options, one empty slot
  policy::TrainConfig train{.epochs = 180};
  policy::ObsConfig obs;
  policy::RolloutConfig rollout;
  int horizon = 16;
  int record_stride = 2;
};

struct CurvePoint {
  int demos = 0;
  double rate = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::vector<std::uint8_t> outcomes;
};

}  // namespace ambench::bench
