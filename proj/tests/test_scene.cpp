#include <doctest.h>

#include <cmath>
#include <set>

#include "ambench/error.hpp"
#include "ambench/feature_cloud.hpp"
#include "ambench/scene.hpp"

using namespace ambench;
using sim::Category;
using sim::Color;
using sim::Scene;
using sim::Task;

TEST_CASE("scene generation is deterministic") {
  const auto a = sim::gen_scene(Task::pack_battery, 7);
  const auto b = sim::gen_scene(Task::pack_battery, 7);
  CHECK(sim::scene_to_json(a) == sim::scene_to_json(b));
  const auto c = sim::gen_scene(Task::pack_battery, 8);
  CHECK(sim::scene_to_json(a) != sim::scene_to_json(c));
}

TEST_CASE("pack scenes have a 3x4 grid and 1-3 loose batteries by default") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const auto scene = sim::gen_scene(Task::pack_battery, seed);
    CHECK(scene.slot_grid.rows == 3);
    CHECK(scene.slot_grid.cols == 4);
    CHECK(scene.ids_of(Category::slot).size() == 12);
    const auto batteries = scene.ids_of(Category::battery);
    CHECK(batteries.size() >= 1);
    CHECK(batteries.size() <= 3);
    for (int id : batteries) {
      const auto& obj = scene.object(id);
      CHECK(obj.graspable);
      CHECK(obj.position.y < sim::layout::kPadMaxY);
    }
  }
}

TEST_CASE("hang scenes have two distinctly colored mugs and four branches") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const auto scene = sim::gen_scene(Task::hang_mug, seed);
    const auto mugs = scene.ids_of(Category::mug);
    REQUIRE(mugs.size() == 2);
    CHECK(scene.object(mugs[0]).color != scene.object(mugs[1]).color);
    for (int id : mugs) CHECK(scene.object(id).color != Color::white);
    CHECK(scene.ids_of(Category::branch).size() == 4);
    CHECK(scene.branch_count == 4);
  }
}

TEST_CASE("same-category objects respect spacing and axis margins") {
  for (std::uint64_t seed = 100; seed < 130; ++seed) {
    sim::SceneConfig cfg;
    cfg.min_batteries = 4;
    cfg.max_batteries = 4;
    const auto scene = sim::gen_scene(Task::pack_battery, seed, cfg);
    const auto ids = scene.ids_of(Category::battery);
    REQUIRE(ids.size() == 4);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      for (std::size_t j = i + 1; j < ids.size(); ++j) {
        const auto& a = scene.object(ids[i]).position;
        const auto& b = scene.object(ids[j]).position;
        CHECK(std::hypot(a.x - b.x, a.y - b.y) >= cfg.battery_spacing);
        CHECK(std::fabs(a.x - b.x) >= cfg.axis_margin);
        CHECK(std::fabs(a.y - b.y) >= cfg.axis_margin);
      }
    }
  }
}

TEST_CASE("impossible spacing raises a placement failure") {
  sim::SceneConfig cfg;
  cfg.min_batteries = 4;
  cfg.max_batteries = 4;
  cfg.battery_spacing = 2.0;  // cannot fit on the pad
  cfg.max_attempts = 50;
  CHECK_THROWS_WITH_AS(sim::gen_scene(Task::pack_battery, 3, cfg), "placement failure", Error);
}

TEST_CASE("occupied slots are tracked and excluded from placement targets") {
  sim::SceneConfig cfg;
  cfg.occupied_slots = 11;
  const auto scene = sim::gen_scene(Task::pack_battery, 5, cfg);
  CHECK(scene.slot_grid.occupied.size() == 11);
  CHECK(scene.place_ids().size() == 1);
}

TEST_CASE("scene json round trip") {
  for (auto task : {Task::pack_battery, Task::hang_mug}) {
    const auto scene = sim::gen_scene(task, 17);
    const auto text = sim::scene_to_json(scene);
    const auto parsed = sim::scene_from_json(text);
    CHECK(sim::scene_to_json(parsed) == text);
    CHECK(parsed.branch_count == scene.branch_count);
    CHECK(parsed.graspable_ids() == scene.graspable_ids());
  }
}

TEST_CASE("reference features are orthonormal") {
  const auto refs = sim::reference_features();
  for (std::size_t i = 0; i < refs.size(); ++i) {
    for (std::size_t j = 0; j < refs.size(); ++j) {
      const double dot = sim::cosine_similarity(refs[i].vector.data(), refs[j].vector.data(),
                                                static_cast<int>(refs[i].vector.size()));
      CHECK(dot == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-5));
    }
  }
}

TEST_CASE("noise-free render reproduces reference features exactly") {
  const auto scene = sim::gen_scene(Task::hang_mug, 3);
  const auto cloud = sim::render_feature_cloud(scene, 0.0, 11);
  const auto refs = sim::reference_features();
  for (std::size_t i = 0; i < cloud.size(); i += 97) {
    const auto& ref = refs[static_cast<int>(cloud.gt_category[i])];
    for (int d = 0; d < cloud.feature_dim; ++d)
      CHECK(cloud.feature_row(i)[d] == doctest::Approx(ref.vector[d]).epsilon(1e-6));
  }
}

TEST_CASE("noisy features stay near their own reference and far from others") {
  double own_min = 1.0, cross_max = -1.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto scene = sim::gen_scene(Task::pack_battery, seed);
    const auto cloud = sim::render_feature_cloud(scene, 0.05, seed ^ 0xfeed);
    const auto refs = sim::reference_features();
    double own_sum = 0;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      for (const auto& ref : refs) {
        const double cos = sim::cosine_similarity(cloud.feature_row(i), ref.vector.data(),
                                                  cloud.feature_dim);
        if (ref.category == cloud.gt_category[i]) {
          own_sum += cos;
          own_min = std::min(own_min, cos);
        } else {
          cross_max = std::max(cross_max, cos);
        }
      }
    }
    CHECK(own_sum / cloud.size() > 0.99);
  }
  CHECK(cross_max < 0.5);
  CHECK(own_min > 0.7);  // nothing drops below the detection threshold
}

TEST_CASE("rendered clouds stay within the point budget and cover all objects") {
  for (auto task : {Task::pack_battery, Task::hang_mug}) {
    const auto scene = sim::gen_scene(task, 23);
    const auto cloud = sim::render_feature_cloud(scene, 0.0, 1);
    CHECK(cloud.size() <= 8000);
    std::set<int> seen(cloud.gt_instance.begin(), cloud.gt_instance.end());
    for (const auto& obj : scene.objects) CHECK(seen.count(obj.id) == 1);
  }
}

TEST_CASE("fps cap engages when the sampling budget exceeds max_points") {
  const auto scene = sim::gen_scene(Task::pack_battery, 4);
  sim::RenderConfig cfg;
  cfg.samples_per_object = 700;  // more than 8000 in total
  const auto cloud = sim::render_feature_cloud(scene, 0.0, 2, cfg);
  CHECK(cloud.size() == 8000);
}

TEST_CASE("feature cloud binary round trip") {
  const auto scene = sim::gen_scene(Task::hang_mug, 9);
  const auto cloud = sim::render_feature_cloud(scene, 0.02, 5);
  const auto path = std::string("/tmp/ambench_test_cloud.fcd");
  sim::write_fcd(path, cloud);
  const auto loaded = sim::read_fcd(path);
  REQUIRE(loaded.size() == cloud.size());
  CHECK(loaded.feature_dim == cloud.feature_dim);
  CHECK(loaded.features == cloud.features);
  CHECK(loaded.gt_instance == cloud.gt_instance);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    CHECK(loaded.points[i].x == doctest::Approx(cloud.points[i].x).epsilon(1e-6));
    CHECK(loaded.gt_category[i] == cloud.gt_category[i]);
  }
}
