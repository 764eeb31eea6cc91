#pragma once

#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "ambench/geom.hpp"
#include "ambench/scene.hpp"

namespace ambench::sim {

/// One end-effector command: absolute target position plus gripper state
/// (grip > 0.5 closes).
struct Action {
  double x = 0.0, y = 0.0, z = 0.0;
  double grip = 0.0;
};

/// Fixed-horizon action sequence, the unit the policy predicts.
struct TrajectoryChunk {
  std::vector<Action> actions;
};

struct ObjectPose {
  geom::Point3 position;
  double yaw = 0.0;
  double up_alignment = 1.0;  // dot of the object axis with world +z
  bool hung = false;
};

struct EnvConfig {
  double grasp_radius = 0.02;
  double snap_radius = 0.04;   // release-to-fixture catchment, XY
  double snap_z_pack = 0.15;   // max release height over a slot
  double snap_z_hang = 0.08;   // |ee.z - branch.z| window for hanging
  int max_frames = 240;
  geom::Point3 ee_home{0.0, -0.3, 0.25};
};

struct RewardThresholds {
  double pack_horizontal = 0.03;  // strict <
  double pack_alignment = 0.99;   // strict >
  double pack_height = 0.009;     // strict <
  double hang_x = 0.05;           // closed <=
  double hang_drop = 0.10;        // closed: branch z - drop <= mug z <= branch z
};

struct EnvState {
  std::shared_ptr<const Scene> scene;
  std::vector<ObjectPose> poses;  // aligned with scene->objects
  std::vector<int> filled_slots;  // slot ids filled during the episode
  geom::Point3 ee;
  bool grip_closed = false;
  std::optional<int> held;
  int frame = 0;

  const ObjectPose& pose_of(int object_id) const;
  ObjectPose& pose_of(int object_id);
};

EnvState make_env(std::shared_ptr<const Scene> scene, const EnvConfig& config = {});

/// Kinematic step: teleport the end-effector to the clamped action target,
/// process grip transitions (grasp within grasp_radius, snap-place on
/// release over a fixture, drop otherwise).
EnvState step_env(const EnvState& state, const Action& action, const EnvConfig& config = {});

double reward_pack_battery(const EnvState& state,
                           const std::vector<std::pair<int, int>>& allowed_pairs,
                           const RewardThresholds& thresholds = {});
double reward_hang_mug(const EnvState& state,
                       const std::vector<std::pair<int, int>>& allowed_pairs,
                       const RewardThresholds& thresholds = {});
/// Dispatch on the scene task.
double task_reward(const EnvState& state, const std::vector<std::pair<int, int>>& allowed_pairs,
                   const RewardThresholds& thresholds = {});

struct Demo {
  std::vector<Action> actions;
  int pick_id = -1;   // logged attention target: object to manipulate
  int place_id = -1;  // logged attention target: where it goes
};

/// Scripted pick-and-place: approach, grasp, lift, transfer, place. The
/// emitted action list succeeds open-loop under step_env.
Demo scripted_demo(const Scene& scene, int pick_id, int place_id, const EnvConfig& config = {});

std::vector<TrajectoryChunk> to_chunks(const std::vector<Action>& actions, int horizon);

}  // namespace ambench::sim
