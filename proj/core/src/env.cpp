#include "ambench/env.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ambench/error.hpp"

namespace ambench::sim {

using geom::Point3;

namespace {

double xy_distance(const Point3& a, const Point3& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

double resting_z(Category c) {
  switch (c) {
    case Category::battery: return layout::kBatteryHeight / 2;
    case Category::mug: return layout::kMugHeight / 2;
    default: return 0.0;
  }
}

}  // namespace

const ObjectPose& EnvState::pose_of(int object_id) const {
  for (std::size_t i = 0; i < scene->objects.size(); ++i)
    if (scene->objects[i].id == object_id) return poses[i];
  throw Error("pose_of: unknown object id");
}

ObjectPose& EnvState::pose_of(int object_id) {
  return const_cast<ObjectPose&>(static_cast<const EnvState*>(this)->pose_of(object_id));
}

EnvState make_env(std::shared_ptr<const Scene> scene, const EnvConfig& config) {
  EnvState state;
  state.scene = std::move(scene);
  state.poses.reserve(state.scene->objects.size());
  for (const auto& obj : state.scene->objects) state.poses.push_back({obj.position, obj.yaw});
  state.ee = config.ee_home;
  return state;
}

EnvState step_env(const EnvState& previous, const Action& action, const EnvConfig& config) {
  if (previous.frame >= config.max_frames) throw Error("step_env: frame limit reached");
  EnvState state = previous;
  state.frame = previous.frame + 1;

  namespace ly = layout;
  state.ee.x = std::clamp(action.x, -ly::kWorkspaceHalf, ly::kWorkspaceHalf);
  state.ee.y = std::clamp(action.y, -ly::kWorkspaceHalf, ly::kWorkspaceHalf);
  state.ee.z = std::clamp(action.z, 0.0, ly::kEnvZMax);

  const bool close = action.grip > 0.5;
  const Scene& scene = *state.scene;

  if (close && !state.grip_closed) {
    // pick the nearest free graspable object within reach
    double best = config.grasp_radius;
    int best_id = -1;
    for (std::size_t i = 0; i < scene.objects.size(); ++i) {
      const auto& obj = scene.objects[i];
      if (!obj.graspable || state.poses[i].hung) continue;
      const double d = geom::distance(state.ee, state.poses[i].position);
      if (d <= best) {
        best = d;
        best_id = obj.id;
      }
    }
    if (best_id >= 0) state.held = best_id;
  }

  if (!close && state.grip_closed && state.held) {
    const int held_id = *state.held;
    auto& pose = state.pose_of(held_id);
    bool snapped = false;
    if (scene.task == Task::pack_battery) {
      if (state.ee.z <= config.snap_z_pack) {
        for (const auto& obj : scene.objects) {
          if (obj.category != Category::slot) continue;
          const auto [row, col] = scene.slot_row_col(obj.id);
          const int index = row * scene.slot_grid.cols + col;
          if (scene.slot_grid.is_occupied(index)) continue;
          if (std::count(state.filled_slots.begin(), state.filled_slots.end(), obj.id)) continue;
          if (xy_distance(state.ee, obj.position) <= config.snap_radius) {
            pose.position = obj.position;
            pose.up_alignment = 1.0;
            state.filled_slots.push_back(obj.id);
            snapped = true;
            break;
          }
        }
      }
    } else {
      for (const auto& obj : scene.objects) {
        if (obj.category != Category::branch) continue;
        if (xy_distance(state.ee, obj.position) <= config.snap_radius &&
            std::fabs(state.ee.z - obj.position.z) <= config.snap_z_hang) {
          pose.position = {obj.position.x, obj.position.y, obj.position.z - 0.05};
          pose.hung = true;
          snapped = true;
          break;
        }
      }
    }
    if (!snapped) {
      pose.position = {state.ee.x, state.ee.y,
                       resting_z(scene.object(held_id).category)};
      pose.up_alignment = 1.0;
    }
    state.held.reset();
  }

  state.grip_closed = close;
  if (state.held) state.pose_of(*state.held).position = state.ee;
  return state;
}

double reward_pack_battery(const EnvState& state,
                           const std::vector<std::pair<int, int>>& allowed_pairs,
                           const RewardThresholds& thresholds) {
  for (const auto& [object_id, slot_id] : allowed_pairs) {
    const auto& obj = state.pose_of(object_id);
    const auto& slot = state.scene->object(slot_id);
    const bool ok = xy_distance(obj.position, slot.position) < thresholds.pack_horizontal &&
                    obj.up_alignment > thresholds.pack_alignment &&
                    obj.position.z < thresholds.pack_height;
    if (ok) return 1.0;
  }
  return 0.0;
}

double reward_hang_mug(const EnvState& state,
                       const std::vector<std::pair<int, int>>& allowed_pairs,
                       const RewardThresholds& thresholds) {
  for (const auto& [mug_id, branch_id] : allowed_pairs) {
    const auto& mug = state.pose_of(mug_id);
    const auto& branch = state.scene->object(branch_id);
    const bool ok = std::fabs(mug.position.x - branch.position.x) <= thresholds.hang_x &&
                    mug.position.z >= branch.position.z - thresholds.hang_drop &&
                    mug.position.z <= branch.position.z;
    if (ok) return 1.0;
  }
  return 0.0;
}

double task_reward(const EnvState& state, const std::vector<std::pair<int, int>>& allowed_pairs,
                   const RewardThresholds& thresholds) {
  if (allowed_pairs.empty()) throw Error("task_reward: no allowed pairs");
  return state.scene->task == Task::pack_battery
             ? reward_pack_battery(state, allowed_pairs, thresholds)
             : reward_hang_mug(state, allowed_pairs, thresholds);
}

namespace {

void move_to(std::vector<Action>& actions, Point3& cursor, const Point3& target, double grip,
             double step = 0.04) {
  const double total = geom::distance(cursor, target);
  const int n = std::max(1, static_cast<int>(std::ceil(total / step)));
  for (int i = 1; i <= n; ++i) {
    const double t = static_cast<double>(i) / n;
    const Point3 p = cursor + (target - cursor) * t;
    actions.push_back({p.x, p.y, p.z, grip});
  }
  cursor = target;
}

}  // namespace

Demo scripted_demo(const Scene& scene, int pick_id, int place_id, const EnvConfig& config) {
  const auto& pick = scene.object(pick_id);
  const auto& place = scene.object(place_id);
  if (!pick.graspable) throw Error("not graspable");
  const bool valid_place = (scene.task == Task::pack_battery &&
                            place.category == Category::slot) ||
                           (scene.task == Task::hang_mug && place.category == Category::branch);
  if (!valid_place) throw Error("scripted_demo: place target is not a fixture for this task");
  namespace ly = layout;
  auto reachable = [](const Point3& p) {
    return std::fabs(p.x) <= ly::kWorkspaceHalf && std::fabs(p.y) <= ly::kWorkspaceHalf &&
           p.z >= 0.0 && p.z <= ly::kEnvZMax;
  };
  if (!reachable(pick.position) || !reachable(place.position)) throw Error("unreachable target");

  Demo demo;
  demo.pick_id = pick_id;
  demo.place_id = place_id;
  Point3 cursor = config.ee_home;
  const double hover = 0.20;
  const double fine_step = 0.02;  // slow final approach: denser supervision

  move_to(demo.actions, cursor, {pick.position.x, pick.position.y, hover}, 0.0);
  move_to(demo.actions, cursor, {pick.position.x, pick.position.y, pick.position.z + 0.06}, 0.0);
  move_to(demo.actions, cursor, pick.position, 0.0, fine_step);
  demo.actions.push_back({cursor.x, cursor.y, cursor.z, 1.0});  // grasp

  if (scene.task == Task::pack_battery) {
    move_to(demo.actions, cursor, {pick.position.x, pick.position.y, hover}, 1.0);
    move_to(demo.actions, cursor, {place.position.x, place.position.y, hover}, 1.0);
    move_to(demo.actions, cursor, {place.position.x, place.position.y, 0.05}, 1.0, fine_step);
    demo.actions.push_back({cursor.x, cursor.y, cursor.z, 0.0});  // release, snap into slot
    move_to(demo.actions, cursor, {place.position.x, place.position.y, hover}, 0.0);
  } else {
    const double transit = place.position.z + 0.10;
    move_to(demo.actions, cursor, {pick.position.x, pick.position.y, transit}, 1.0);
    move_to(demo.actions, cursor, {place.position.x, place.position.y, transit}, 1.0);
    move_to(demo.actions, cursor, {place.position.x, place.position.y, place.position.z - 0.02},
            1.0, fine_step);
    demo.actions.push_back({cursor.x, cursor.y, cursor.z, 0.0});  // release, hang
    move_to(demo.actions, cursor, {place.position.x, place.position.y, transit}, 0.0);
  }
  return demo;
}

std::vector<TrajectoryChunk> to_chunks(const std::vector<Action>& actions, int horizon) {
  if (horizon < 1) throw Error("to_chunks: horizon must be >= 1");
  std::vector<TrajectoryChunk> chunks;
  for (std::size_t start = 0; start < actions.size(); start += horizon) {
    TrajectoryChunk chunk;
    for (int i = 0; i < horizon; ++i) {
      const std::size_t idx = std::min(actions.size() - 1, start + i);
      chunk.actions.push_back(actions[idx]);
    }
    chunks.push_back(std::move(chunk));
  }
  return chunks;
}

}  // namespace ambench::sim
