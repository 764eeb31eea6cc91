#include <doctest.h>

#include <cmath>

#include "ambench/env.hpp"
#include "ambench/error.hpp"
#include "ambench/rng.hpp"

using namespace ambench;
using sim::Action;
using sim::Category;
using sim::EnvState;
using sim::Scene;
using sim::SceneObject;
using sim::Task;

namespace {

/// Hand-built pack scene: one battery, full grid of vacant slots.
Scene tiny_pack_scene(geom::Point3 battery_pos = {0.1, -0.2, 0.025}) {
  Scene scene;
  scene.task = Task::pack_battery;
  scene.seed = 1;
  int id = 0;
  scene.objects.push_back({id++, Category::crate, sim::Color::none, {0.0, 0.19, 0.0}, 0, false});
  scene.objects.push_back({id++, Category::pad, sim::Color::none, {0, -0.215, 0.002}, 0, false});
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 4; ++c)
      scene.objects.push_back({id++, Category::slot, sim::Color::none,
                               {(c - 1.5) * 0.15, 0.19 + (r - 1.0) * 0.15, 0.005}, 0, false});
  scene.objects.push_back({id++, Category::battery, sim::Color::none, battery_pos, 0, true});
  return scene;
}

int slot_at(const Scene& scene, int row, int col) {
  return scene.ids_of(Category::slot)[row * 4 + col];
}

}  // namespace

TEST_CASE("closing the grip away from any object grasps nothing") {
  auto scene = std::make_shared<const Scene>(tiny_pack_scene());
  auto state = sim::make_env(scene);
  const auto& battery = scene->object(scene->graspable_ids()[0]);
  state = sim::step_env(state, {battery.position.x + 0.05, battery.position.y,
                                battery.position.z, 1.0});
  CHECK_FALSE(state.held.has_value());
  CHECK(state.grip_closed);
}

TEST_CASE("closing the grip on the battery grasps it and it tracks the gripper") {
  auto scene = std::make_shared<const Scene>(tiny_pack_scene());
  auto state = sim::make_env(scene);
  const int battery = scene->graspable_ids()[0];
  const auto pos = scene->object(battery).position;
  state = sim::step_env(state, {pos.x, pos.y, pos.z, 1.0});
  REQUIRE(state.held.has_value());
  CHECK(*state.held == battery);
  state = sim::step_env(state, {0.0, 0.0, 0.3, 1.0});
  CHECK(state.pose_of(battery).position.z == doctest::Approx(0.3));
}

TEST_CASE("releasing over an empty slot snaps the battery into it") {
  auto scene = std::make_shared<const Scene>(tiny_pack_scene());
  auto state = sim::make_env(scene);
  const int battery = scene->graspable_ids()[0];
  const int slot = slot_at(*scene, 1, 2);
  const auto bpos = scene->object(battery).position;
  const auto spos = scene->object(slot).position;
  state = sim::step_env(state, {bpos.x, bpos.y, bpos.z, 1.0});
  state = sim::step_env(state, {spos.x + 0.01, spos.y, 0.05, 1.0});
  state = sim::step_env(state, {spos.x + 0.01, spos.y, 0.05, 0.0});
  CHECK_FALSE(state.held.has_value());
  CHECK(state.pose_of(battery).position.x == doctest::Approx(spos.x));
  CHECK(state.pose_of(battery).position.z == doctest::Approx(spos.z));
  CHECK(sim::reward_pack_battery(state, {{battery, slot}}) == 1.0);
}

TEST_CASE("releasing far from slots drops the object upright at rest height") {
  auto scene = std::make_shared<const Scene>(tiny_pack_scene());
  auto state = sim::make_env(scene);
  const int battery = scene->graspable_ids()[0];
  const auto bpos = scene->object(battery).position;
  state = sim::step_env(state, {bpos.x, bpos.y, bpos.z, 1.0});
  state = sim::step_env(state, {-0.2, -0.3, 0.2, 1.0});
  state = sim::step_env(state, {-0.2, -0.3, 0.2, 0.0});
  CHECK(state.pose_of(battery).position.z == doctest::Approx(0.025));
  CHECK(state.pose_of(battery).up_alignment == 1.0);
}

TEST_CASE("step clamps the end effector to the workspace") {
  auto scene = std::make_shared<const Scene>(tiny_pack_scene());
  auto state = sim::make_env(scene);
  state = sim::step_env(state, {3.0, -3.0, 9.0, 0.0});
  CHECK(state.ee.x == 0.4);
  CHECK(state.ee.y == -0.4);
  CHECK(state.ee.z == 0.6);
}

TEST_CASE("stepping past the frame limit throws") {
  auto scene = std::make_shared<const Scene>(tiny_pack_scene());
  sim::EnvConfig cfg;
  cfg.max_frames = 3;
  auto state = sim::make_env(scene, cfg);
  for (int i = 0; i < 3; ++i) state = sim::step_env(state, {0, 0, 0.2, 0.0}, cfg);
  CHECK_THROWS_AS(sim::step_env(state, {0, 0, 0.2, 0.0}, cfg), Error);
}

TEST_CASE("pack reward boundary table follows the strict inequalities") {
  auto scene = std::make_shared<const Scene>(tiny_pack_scene());
  const int battery = scene->graspable_ids()[0];
  const int slot = slot_at(*scene, 0, 0);
  const auto spos = scene->object(slot).position;
  auto state = sim::make_env(scene);

  auto with = [&](double dxy, double dot, double height) {
    EnvState s = state;
    s.pose_of(battery).position = {spos.x + dxy, spos.y, height};
    s.pose_of(battery).up_alignment = dot;
    return sim::reward_pack_battery(s, {{battery, slot}});
  };

  CHECK(with(0.02, 0.995, 0.005) == 1.0);
  // horizontal threshold 0.03: strictly less than
  CHECK(with(0.0299, 0.995, 0.005) == 1.0);
  CHECK(with(0.03, 0.995, 0.005) == 0.0);
  CHECK(with(0.0301, 0.995, 0.005) == 0.0);
  // alignment threshold 0.99: strictly greater than
  CHECK(with(0.0, 0.9901, 0.005) == 1.0);
  CHECK(with(0.0, 0.99, 0.005) == 0.0);
  CHECK(with(0.0, 0.98, 0.005) == 0.0);
  // height threshold 0.009: strictly less than
  CHECK(with(0.0, 0.995, 0.0089) == 1.0);
  CHECK(with(0.0, 0.995, 0.009) == 0.0);
  CHECK(with(0.0, 0.995, 0.0091) == 0.0);
}

TEST_CASE("hang reward bounds are closed") {
  const auto gen = sim::gen_scene(Task::hang_mug, 2);
  auto scene = std::make_shared<const Scene>(gen);
  const int mug = scene->graspable_ids()[0];
  const int branch = scene->ids_of(Category::branch)[0];
  const auto bpos = scene->object(branch).position;
  auto state = sim::make_env(scene);

  auto with = [&](double dx, double z) {
    EnvState s = state;
    s.pose_of(mug).position = {bpos.x + dx, bpos.y, z};
    return sim::reward_hang_mug(s, {{mug, branch}});
  };

  CHECK(with(0.0, bpos.z) == 1.0);          // exactly at the branch pose
  CHECK(with(0.05, bpos.z - 0.05) == 1.0);  // x bound is inclusive
  CHECK(with(0.051, bpos.z - 0.05) == 0.0);
  CHECK(with(0.06, bpos.z - 0.05) == 0.0);
  CHECK(with(0.03, bpos.z - 0.05) == 1.0);
  CHECK(with(0.0, bpos.z - 0.1) == 1.0);  // lower offset inclusive
  CHECK(with(0.0, bpos.z - 0.101) == 0.0);
  CHECK(with(0.0, bpos.z + 0.001) == 0.0);
}

TEST_CASE("rewards are monotone under threshold slack") {
  Rng rng(21);
  auto scene = std::make_shared<const Scene>(tiny_pack_scene());
  const int battery = scene->graspable_ids()[0];
  const int slot = slot_at(*scene, 2, 3);
  const auto spos = scene->object(slot).position;
  for (int trial = 0; trial < 200; ++trial) {
    EnvState s = sim::make_env(scene);
    s.pose_of(battery).position = {spos.x + rng.uniform(-0.05, 0.05),
                                   spos.y + rng.uniform(-0.05, 0.05), rng.uniform(0.0, 0.02)};
    s.pose_of(battery).up_alignment = rng.uniform(0.97, 1.0);
    sim::RewardThresholds tight;
    sim::RewardThresholds loose;
    loose.pack_horizontal = tight.pack_horizontal + rng.uniform(0.0, 0.05);
    loose.pack_alignment = tight.pack_alignment - rng.uniform(0.0, 0.05);
    loose.pack_height = tight.pack_height + rng.uniform(0.0, 0.05);
    const double before = sim::reward_pack_battery(s, {{battery, slot}}, tight);
    const double after = sim::reward_pack_battery(s, {{battery, slot}}, loose);
    CHECK(after >= before);
  }
}

TEST_CASE("scripted demo packs the battery with reward 1") {
  auto scene = std::make_shared<const Scene>(tiny_pack_scene({0.1, -0.2, 0.025}));
  // target the slot closest to (0.05, 0.1): front row, third column
  const int battery = scene->graspable_ids()[0];
  const int slot = slot_at(*scene, 0, 2);
  const auto demo = sim::scripted_demo(*scene, battery, slot);
  CHECK(demo.pick_id == battery);
  CHECK(demo.place_id == slot);
  auto state = sim::make_env(scene);
  for (const auto& action : demo.actions) state = sim::step_env(state, action);
  CHECK(state.frame <= 240);
  CHECK(sim::reward_pack_battery(state, {{battery, slot}}) == 1.0);
}

TEST_CASE("scripted demos replay successfully on random scenes of both tasks") {
  Rng rng(31);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    for (auto task : {Task::pack_battery, Task::hang_mug}) {
      const auto scene = std::make_shared<const Scene>(sim::gen_scene(task, seed + 500));
      const auto picks = scene->graspable_ids();
      const auto places = scene->place_ids();
      const int pick = picks[rng.index(picks.size())];
      const int place = places[rng.index(places.size())];
      const auto demo = sim::scripted_demo(*scene, pick, place);
      auto state = sim::make_env(scene);
      for (const auto& action : demo.actions) state = sim::step_env(state, action);
      CHECK(state.frame <= 240);
      CHECK(sim::task_reward(state, {{pick, place}}) == 1.0);
    }
  }
}

TEST_CASE("scripted demo rejects non-graspable picks") {
  const auto scene = tiny_pack_scene();
  const int slot = scene.ids_of(Category::slot)[0];
  CHECK_THROWS_WITH_AS(sim::scripted_demo(scene, slot, slot_at(scene, 0, 1)), "not graspable",
                       Error);
}

TEST_CASE("scripted demo rejects unreachable targets") {
  auto scene = tiny_pack_scene();
  for (auto& obj : scene.objects)
    if (obj.category == Category::battery) obj.position.x = 0.9;
  const int battery = scene.graspable_ids()[0];
  CHECK_THROWS_WITH_AS(sim::scripted_demo(scene, battery, slot_at(scene, 0, 0)),
                       "unreachable target", Error);
}

TEST_CASE("chunking pads the tail by repeating the last action") {
  std::vector<Action> actions(10, Action{1, 2, 3, 0});
  actions.back() = {9, 9, 9, 1};
  const auto chunks = sim::to_chunks(actions, 4);
  REQUIRE(chunks.size() == 3);
  CHECK(chunks[2].actions.size() == 4);
  CHECK(chunks[2].actions[1].x == 9);
  CHECK(chunks[2].actions[3].grip == 1);
}
