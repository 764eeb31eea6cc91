#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ambench/geom.hpp"

namespace ambench::sim {

enum class Task { pack_battery, hang_mug };

enum class Category : std::uint8_t { battery, slot, mug, branch, crate, tree, pad };
constexpr int kCategoryCount = 7;

enum class Color : std::uint8_t { red, green, blue, white, none };

const char* to_string(Task t);
const char* to_string(Category c);
const char* to_string(Color c);
Task task_from_string(const std::string& s);
Category category_from_string(const std::string& s);
Color color_from_string(const std::string& s);

struct SceneObject {
  int id = 0;
  Category category = Category::battery;
  Color color = Color::none;
  geom::Point3 position;  // meters, world frame
  double yaw = 0.0;       // radians
  bool graspable = false;
};

struct SlotGrid {
  int rows = 3;
  int cols = 4;
  std::vector<int> occupied;  // row-major slot indices holding a plug

  bool is_occupied(int index) const;
  int count() const { return rows * cols; }
};

struct Scene {
  Task task = Task::pack_battery;
  std::uint64_t seed = 0;
  std::vector<SceneObject> objects;
  SlotGrid slot_grid;    // pack_battery only
  int branch_count = 0;  // hang_mug only

  const SceneObject& object(int id) const;
  std::vector<int> ids_of(Category c) const;
  std::vector<int> graspable_ids() const;
  /// Valid placement fixtures: vacant slots (pack) or branches (hang).
  std::vector<int> place_ids() const;
  /// Grid coordinates of a slot object; pack_battery only.
  std::pair<int, int> slot_row_col(int slot_id) const;
};

/// Layout constants for the tabletop world. Everything in meters; the robot
/// base sits at the origin, +x right, +y away from the robot, +z up.
namespace layout {
constexpr double kWorkspaceHalf = 0.4;
constexpr double kEnvZMax = 0.6;

constexpr double kBatteryRadius = 0.012;
constexpr double kBatteryHeight = 0.05;

constexpr double kSlotPitch = 0.15;
constexpr double kSlotDiskRadius = 0.02;
constexpr double kSlotDiskZ = 0.012;
constexpr double kSlotPosZ = 0.005;
constexpr double kCrateWallHalfX = 0.27;
constexpr double kCrateWallHalfY = 0.195;
constexpr double kCrateWallHeight = 0.05;
constexpr double kCrateCenterY = 0.19;

constexpr double kMugBodyRadius = 0.035;
constexpr double kMugHeight = 0.08;
constexpr double kMugHandleLength = 0.03;

constexpr double kBranchInnerRadius = 0.10;
constexpr double kBranchOuterRadius = 0.22;
constexpr double kTrunkRadius = 0.015;
// branch heights: furthest(+y), right-middle(+x), left-top(-x), right-top(+x)
constexpr double kBranchZ[4] = {0.15, 0.23, 0.31, 0.39};

constexpr double kPadZ = 0.002;
constexpr double kPadMinY = -0.35;
constexpr double kPadMaxY = -0.08;
}  // namespace layout

struct SceneConfig {
  int min_batteries = 1;
  int max_batteries = 3;
  int occupied_slots = 0;
  bool allow_white_mug = false;
  double battery_spacing = 0.15;  // center-to-center minimum on the pad
  double mug_spacing = 0.30;
  double axis_margin = 0.03;  // per-axis separation so -most descriptors stay crisp
  int max_attempts = 1000;
};

/// Deterministic scene synthesis; throws Error("placement failure") when
/// rejection sampling cannot satisfy the spacing constraints.
Scene gen_scene(Task task, std::uint64_t seed, const SceneConfig& config = {});

/// Throws if a scene violates its structural invariants.
void validate_scene(const Scene& scene);

std::string scene_to_json(const Scene& scene);
Scene scene_from_json(const std::string& text);

}  // namespace ambench::sim
