#include <doctest.h>

#include <algorithm>
#include <set>

#include "ambench/error.hpp"
#include "ambench/grounding.hpp"
#include "ambench/policy.hpp"
#include "oracles.hpp"

using namespace ambench;
using ground::AttributeOracle;
using ground::InstanceRecord;
using lang::Instruction;
using sim::Category;
using sim::Color;
using sim::Scene;
using sim::Task;
using spatial::Relation;

namespace {

std::vector<InstanceRecord> records_at(const std::vector<geom::Point3>& centroids) {
  std::vector<InstanceRecord> out;
  for (std::size_t i = 0; i < centroids.size(); ++i) {
    InstanceRecord rec;
    rec.centroid = centroids[i];
    rec.majority_instance = static_cast<int>(i);
    out.push_back(rec);
  }
  return out;
}

bool detect_matches_gt(const Scene& scene, const sim::FeatureCloud& cloud, Category category,
                       double eps) {
  const auto ref = sim::reference_feature(category);
  const auto instances = ground::detect(cloud, ref, 0.7, eps);
  const auto gt_ids = scene.task == Task::pack_battery && category == Category::slot
                          ? scene.place_ids()
                          : scene.ids_of(category);
  if (instances.size() != gt_ids.size()) return false;
  std::set<int> seen;
  for (const auto& rec : instances) {
    // every cluster must exactly equal one ground-truth instance partition
    std::set<std::size_t> got(rec.indices.begin(), rec.indices.end());
    const auto expected = cloud.instance_indices(rec.majority_instance);
    if (got != std::set<std::size_t>(expected.begin(), expected.end())) return false;
    seen.insert(rec.majority_instance);
  }
  return seen.size() == gt_ids.size();
}

}  // namespace

TEST_CASE("noise-free detection recovers the ground-truth partition per category") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto pack = sim::gen_scene(Task::pack_battery, seed + 40);
    const auto pack_cloud = sim::render_feature_cloud(pack, 0.0, seed);
    CHECK(detect_matches_gt(pack, pack_cloud, Category::battery, 0.1));
    CHECK(detect_matches_gt(pack, pack_cloud, Category::slot, 0.1));

    const auto hang = sim::gen_scene(Task::hang_mug, seed + 40);
    const auto hang_cloud = sim::render_feature_cloud(hang, 0.0, seed);
    CHECK(detect_matches_gt(hang, hang_cloud, Category::mug, 0.15));
    CHECK(detect_matches_gt(hang, hang_cloud, Category::branch, 0.15));
  }
}

TEST_CASE("mug scenes detect exactly two mug instances") {
  const auto scene = sim::gen_scene(Task::hang_mug, 3);
  const auto cloud = sim::render_feature_cloud(scene, 0.05, 9);
  const auto instances = ground::detect(cloud, sim::reference_feature(Category::mug), 0.7, 0.15);
  CHECK(instances.size() == 2);
}

TEST_CASE("an unattainable similarity threshold detects nothing") {
  const auto scene = sim::gen_scene(Task::hang_mug, 3);
  const auto cloud = sim::render_feature_cloud(scene, 0.02, 9);
  CHECK(ground::detect(cloud, sim::reference_feature(Category::mug), 1.0, 0.15).empty());
}

TEST_CASE("sel_pos reproduces the midpoint rule on the documented slot row") {
  const auto instances =
      records_at({{0.0, 0, 0}, {0.1, 0, 0}, {0.2, 0, 0}, {0.3, 0, 0}});
  const auto& chosen = ground::sel_pos(instances, Relation::col_middle);
  CHECK(chosen.majority_instance == 1);  // |x - 0.15| ties at indices 1, 2 -> lowest wins
}

TEST_CASE("sel_pos with a single instance returns it for any relation") {
  const auto instances = records_at({{0.4, -0.2, 0.1}});
  for (auto rel : {Relation::leftmost, Relation::furthest, Relation::topmost_right,
                   Relation::col_middle})
    CHECK(ground::sel_pos(instances, rel).majority_instance == 0);
}

TEST_CASE("sel_pos argmin/argmax relations match a brute-force oracle") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed ^ 0x5e1);
    std::vector<geom::Point3> centroids;
    for (int i = 0; i < 8; ++i)
      centroids.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0, 1)});
    const auto instances = records_at(centroids);

    auto brute = [&](auto&& score) {
      std::size_t best = 0;
      for (std::size_t i = 1; i < centroids.size(); ++i)
        if (score(centroids[i]) < score(centroids[best])) best = i;
      return static_cast<int>(best);
    };
    CHECK(ground::sel_pos(instances, Relation::leftmost).majority_instance ==
          brute([](const geom::Point3& p) { return p.x; }));
    CHECK(ground::sel_pos(instances, Relation::rightmost).majority_instance ==
          brute([](const geom::Point3& p) { return -p.x; }));
    CHECK(ground::sel_pos(instances, Relation::frontmost).majority_instance ==
          brute([](const geom::Point3& p) { return p.y; }));
    CHECK(ground::sel_pos(instances, Relation::backmost).majority_instance ==
          brute([](const geom::Point3& p) { return -p.y; }));
    CHECK(ground::sel_pos(instances, Relation::nearest).majority_instance ==
          brute([](const geom::Point3& p) { return std::hypot(p.x, p.y); }));
    CHECK(ground::sel_pos(instances, Relation::furthest).majority_instance ==
          brute([](const geom::Point3& p) { return -std::hypot(p.x, p.y); }));
  }
}

TEST_CASE("sel_pos relative relations are translation invariant") {
  Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<geom::Point3> centroids;
    for (int i = 0; i < 6; ++i)
      centroids.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0, 1)});
    const geom::Point3 shift{rng.uniform(-5, 5), rng.uniform(-5, 5), 0};
    std::vector<geom::Point3> moved;
    for (const auto& c : centroids) moved.push_back(c + shift);
    for (auto rel : {Relation::leftmost, Relation::rightmost, Relation::frontmost,
                     Relation::backmost, Relation::col_middle, Relation::row_middle}) {
      CHECK(ground::sel_pos(records_at(centroids), rel).majority_instance ==
            ground::sel_pos(records_at(moved), rel).majority_instance);
    }
  }
}

TEST_CASE("sel_pos nearest/furthest are invariant under rotation about the origin") {
  Rng rng(18);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<geom::Point3> centroids;
    for (int i = 0; i < 6; ++i)
      centroids.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0, 1)});
    const double theta = rng.uniform(0, 2 * M_PI);
    std::vector<geom::Point3> rotated;
    for (const auto& c : centroids)
      rotated.push_back({c.x * std::cos(theta) - c.y * std::sin(theta),
                         c.x * std::sin(theta) + c.y * std::cos(theta), c.z});
    for (auto rel : {Relation::nearest, Relation::furthest})
      CHECK(ground::sel_pos(records_at(centroids), rel).majority_instance ==
            ground::sel_pos(records_at(rotated), rel).majority_instance);
  }
}

TEST_CASE("sel_pos rejects an empty instance list") {
  CHECK_THROWS_WITH_AS(ground::sel_pos({}, Relation::leftmost), "empty instance list", Error);
}

TEST_CASE("sel_name consults the color oracle") {
  const auto scene = sim::gen_scene(Task::hang_mug, 13);
  const auto mugs = scene.ids_of(Category::mug);
  AttributeOracle oracle(scene);

  std::vector<InstanceRecord> instances;
  for (int id : mugs) {
    InstanceRecord rec;
    rec.majority_instance = id;
    instances.push_back(rec);
  }
  const auto color0 = scene.object(mugs[0]).color;
  CHECK(ground::sel_name(instances, color0, oracle).majority_instance == mugs[0]);

  // a color absent from the scene is a perception failure
  Color missing = Color::red;
  for (auto c : {Color::red, Color::green, Color::blue}) {
    if (scene.object(mugs[0]).color != c && scene.object(mugs[1]).color != c) missing = c;
  }
  CHECK_THROWS_WITH_AS(ground::sel_name(instances, missing, oracle), "attribute not found",
                       Error);

  // when every instance matches, the first in instance order wins
  std::vector<InstanceRecord> twins = {instances[0], instances[0]};
  CHECK(&ground::sel_name(twins, color0, oracle) == &twins[0]);
}

TEST_CASE("compile maps components onto detect/select pairs") {
  Instruction instr;
  instr.task = Task::hang_mug;
  instr.pick_component = lang::DescriptiveComponent{Category::mug, lang::Descriptor::blue};
  instr.place_component =
      lang::DescriptiveComponent{Category::branch, lang::Descriptor::topmost_left};
  const auto program = ground::compile_program(instr);
  CHECK(program.to_sexpr() ==
        "(pair (select (detect mug) (name blue)) (select (detect branch) (pos topmost-left)))");
}

TEST_CASE("compile turns slack roles into seeded any-selectors") {
  Instruction instr;
  instr.task = Task::hang_mug;
  instr.slackness = lang::Slackness::both_slack;
  const auto program = ground::compile_program(instr);
  CHECK(program.to_sexpr() ==
        "(pair (select (detect mug) (any)) (select (detect branch) (any)))");
}

TEST_CASE("compile expresses 'the other one' as an exclusion") {
  Instruction instr;
  instr.task = Task::hang_mug;
  instr.pick_excluded = lang::DescriptiveComponent{Category::mug, lang::Descriptor::blue};
  instr.place_component = lang::DescriptiveComponent{Category::branch, lang::Descriptor::furthest};
  const auto program = ground::compile_program(instr);
  CHECK(program.to_sexpr() ==
        "(pair (select (detect mug) (other (name blue))) (select (detect branch) "
        "(pos furthest)))");
}

namespace {

struct PipelineRun {
  Scene scene;
  sim::FeatureCloud cloud;
  Instruction instruction;
  ground::ProgramResult result;
};

PipelineRun run_pipeline(Task task, std::uint64_t seed) {
  PipelineRun run{sim::gen_scene(task, seed)};
  run.cloud = sim::render_feature_cloud(run.scene, 0.0, seed ^ 0xc1);
  Rng rng(seed ^ 0x11);
  run.instruction = lang::sample_instruction(task, run.scene, rng);
  const auto program = ground::compile_program(run.instruction);
  run.result = ground::run_program(program, run.cloud, sim::reference_features(),
                                   AttributeOracle(run.scene), seed ^ 0x77);
  return run;
}

}  // namespace

TEST_CASE("run_program lands inside the extracted target sets on noise-free clouds") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    for (auto task : {Task::pack_battery, Task::hang_mug}) {
      const auto run = run_pipeline(task, 3000 + seed);
      const auto targets = lang::extract_targets(run.scene, run.instruction);
      CHECK(std::count(targets.pick_ids.begin(), targets.pick_ids.end(),
                       run.result.pick.majority_instance) == 1);
      CHECK(std::count(targets.place_ids.begin(), targets.place_ids.end(),
                       run.result.place.majority_instance) == 1);
    }
  }
}

TEST_CASE("run_program is deterministic given the seed") {
  const auto a = run_pipeline(Task::hang_mug, 999);
  const auto b = run_pipeline(Task::hang_mug, 999);
  CHECK(a.result.pick.majority_instance == b.result.pick.majority_instance);
  CHECK(a.result.place.majority_instance == b.result.place.majority_instance);
  CHECK(a.result.pick.indices == b.result.pick.indices);
}

TEST_CASE("a detect miss is tagged as a perception failure") {
  const auto scene = sim::gen_scene(Task::pack_battery, 8);
  const auto cloud = sim::render_feature_cloud(scene, 0.0, 8);
  ground::SelectionProgram program;
  program.pick.category = Category::mug;  // no mugs in a pack scene
  program.place.category = Category::slot;
  try {
    ground::run_program(program, cloud, sim::reference_features(), AttributeOracle(scene), 0);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.stage() == FailStage::perception);
  }
}

TEST_CASE("attention support is the union of the selected instances") {
  const auto run = run_pipeline(Task::pack_battery, 4321);
  const auto attention =
      ground::build_attention(run.cloud, run.result.pick, run.result.place);
  std::size_t support = 0;
  for (auto v : attention) support += v;
  std::set<std::size_t> expected(run.result.pick.indices.begin(), run.result.pick.indices.end());
  expected.insert(run.result.place.indices.begin(), run.result.place.indices.end());
  CHECK(support == expected.size());

  // degenerate: pick == place keeps a single instance's support
  const auto degenerate = ground::build_attention(run.cloud, run.result.pick, run.result.pick);
  std::size_t degenerate_support = 0;
  for (auto v : degenerate) degenerate_support += v;
  CHECK(degenerate_support == run.result.pick.indices.size());

  // the attended ground-truth ids are exactly the chosen pair
  std::set<int> ids;
  for (std::size_t i = 0; i < attention.size(); ++i)
    if (attention[i]) ids.insert(run.cloud.gt_instance[i]);
  CHECK(ids == std::set<int>{run.result.pick.majority_instance,
                             run.result.place.majority_instance});
}

TEST_CASE("full pipeline attention equals the ground-truth support, Chamfer zero") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto task = seed % 2 ? Task::hang_mug : Task::pack_battery;
    const auto run = run_pipeline(task, 7000 + seed);
    const auto attention = ground::build_attention(run.cloud, run.result.pick, run.result.place);
    geom::PointSet gt;
    for (std::size_t i = 0; i < run.cloud.size(); ++i)
      if (run.cloud.gt_instance[i] == run.result.pick.majority_instance ||
          run.cloud.gt_instance[i] == run.result.place.majority_instance)
        gt.push_back(run.cloud.points[i]);
    const auto generated = ground::attention_points(run.cloud, attention);
    CHECK(geom::chamfer_distance(generated, gt) == 0.0);
  }
}

TEST_CASE("empty attention projects to all-zero masks") {
  const auto scene = sim::gen_scene(Task::hang_mug, 2);
  const auto cloud = sim::render_feature_cloud(scene, 0.0, 2);
  const auto rig = policy::default_camera_rig();
  ground::AttentionMap empty(cloud.size(), 0);
  for (const auto& mask : ground::project_attention_2d(empty, cloud, rig, 2))
    CHECK(mask.count() == 0);
}

TEST_CASE("one attended point dilates to a square block") {
  sim::FeatureCloud cloud;
  cloud.feature_dim = 1;
  cloud.points = {{0.0, 0.05, 0.05}};  // the rig's look-at target
  cloud.features = {1.0f};
  cloud.gt_instance = {0};
  cloud.gt_category = {Category::battery};
  ground::AttentionMap map{1};
  const auto rig = policy::default_camera_rig(64, 48);
  const auto masks = ground::project_attention_2d(map, cloud, rig, 2);
  REQUIRE(!masks.empty());
  CHECK(masks[0].count() == 25);
}

TEST_CASE("full-cloud attention covers every visible projection") {
  const auto scene = sim::gen_scene(Task::pack_battery, 31);
  const auto cloud = sim::render_feature_cloud(scene, 0.0, 31);
  const auto rig = policy::default_camera_rig();
  ground::AttentionMap full(cloud.size(), 1);
  const auto masks = ground::project_attention_2d(full, cloud, rig, 0);
  for (std::size_t c = 0; c < rig.size(); ++c) {
    for (const auto& proj : geom::project(cloud.points, rig[c])) {
      if (!proj.visible) continue;
      CHECK(masks[c].at(static_cast<int>(std::lround(proj.u)),
                        static_cast<int>(std::lround(proj.v))) == 1);
    }
  }
}

TEST_CASE("attention map file round trip") {
  ground::AttentionMap map{1, 0, 0, 1, 1, 0, 1};
  const auto path = std::string("/tmp/ambench_test.att");
  ground::write_att(path, map);
  CHECK(ground::read_att(path) == map);
}
