#include "ambench/scene.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "ambench/error.hpp"
#include "ambench/rng.hpp"

namespace ambench::sim {

using geom::Point3;
using ordered_json = nlohmann::ordered_json;

const char* to_string(Task t) {
  return t == Task::pack_battery ? "pack_battery" : "hang_mug";
}

const char* to_string(Category c) {
  switch (c) {
    case Category::battery: return "battery";
    case Category::slot: return "slot";
    case Category::mug: return "mug";
    case Category::branch: return "branch";
    case Category::crate: return "crate";
    case Category::tree: return "tree";
    case Category::pad: return "pad";
  }
  return "battery";
}

const char* to_string(Color c) {
  switch (c) {
    case Color::red: return "red";
    case Color::green: return "green";
    case Color::blue: return "blue";
    case Color::white: return "white";
    case Color::none: return "none";
  }
  return "none";
}

Task task_from_string(const std::string& s) {
  if (s == "pack_battery") return Task::pack_battery;
  if (s == "hang_mug") return Task::hang_mug;
  throw Error("unknown task: " + s);
}

Category category_from_string(const std::string& s) {
  for (int i = 0; i < kCategoryCount; ++i) {
    const auto c = static_cast<Category>(i);
    if (s == to_string(c)) return c;
  }
  throw Error("unknown category: " + s);
}

Color color_from_string(const std::string& s) {
  for (int i = 0; i < 5; ++i) {
    const auto c = static_cast<Color>(i);
    if (s == to_string(c)) return c;
  }
  throw Error("unknown color: " + s);
}

bool SlotGrid::is_occupied(int index) const {
  return std::find(occupied.begin(), occupied.end(), index) != occupied.end();
}

const SceneObject& Scene::object(int id) const {
  for (const auto& obj : objects)
    if (obj.id == id) return obj;
  throw Error("unknown object id");
}

std::vector<int> Scene::ids_of(Category c) const {
  std::vector<int> out;
  for (const auto& obj : objects)
    if (obj.category == c) out.push_back(obj.id);
  return out;
}

std::vector<int> Scene::graspable_ids() const {
  std::vector<int> out;
  for (const auto& obj : objects)
    if (obj.graspable) out.push_back(obj.id);
  return out;
}

std::vector<int> Scene::place_ids() const {
  std::vector<int> out;
  if (task == Task::pack_battery) {
    int index = 0;
    for (const auto& obj : objects) {
      if (obj.category != Category::slot) continue;
      if (!slot_grid.is_occupied(index)) out.push_back(obj.id);
      ++index;
    }
  } else {
    for (const auto& obj : objects)
      if (obj.category == Category::branch) out.push_back(obj.id);
  }
  return out;
}

std::pair<int, int> Scene::slot_row_col(int slot_id) const {
  int index = 0;
  for (const auto& obj : objects) {
    if (obj.category != Category::slot) continue;
    if (obj.id == slot_id) return {index / slot_grid.cols, index % slot_grid.cols};
    ++index;
  }
  throw Error("slot_row_col: not a slot id");
}

namespace {

struct Placer {
  Rng& rng;
  int max_attempts;
  std::vector<Point3> placed;       // same-category positions to respect
  double spacing;
  double axis_margin;

  Point3 place(double x_lo, double x_hi, double y_lo, double y_hi, double z) {
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
      Point3 p{rng.uniform(x_lo, x_hi), rng.uniform(y_lo, y_hi), z};
      bool ok = true;
      for (const auto& q : placed) {
        const double dx = std::fabs(p.x - q.x);
        const double dy = std::fabs(p.y - q.y);
        if (std::hypot(dx, dy) < spacing || dx < axis_margin || dy < axis_margin) {
          ok = false;
          break;
        }
      }
      if (ok) {
        placed.push_back(p);
        return p;
      }
    }
    throw Error("placement failure");
  }
};

constexpr double kBranchDirX[4] = {0.0, 1.0, -1.0, 1.0};
constexpr double kBranchDirY[4] = {1.0, 0.0, 0.0, 0.0};

}  // namespace

Scene gen_scene(Task task, std::uint64_t seed, const SceneConfig& config) {
  Rng rng(seed ^ 0x5ce9e5f2ULL);
  Scene scene;
  scene.task = task;
  scene.seed = seed;
  int next_id = 0;
  namespace ly = layout;

  if (task == Task::pack_battery) {
    const double crate_x = rng.uniform(-0.05, 0.05);
    const Point3 crate_center{crate_x, ly::kCrateCenterY, 0.0};
    scene.objects.push_back({next_id++, Category::crate, Color::none, crate_center, 0.0, false});
    scene.objects.push_back({next_id++, Category::pad, Color::none,
                             Point3{0.0, (ly::kPadMinY + ly::kPadMaxY) / 2, ly::kPadZ}, 0.0, false});

    scene.slot_grid.rows = 3;
    scene.slot_grid.cols = 4;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 4; ++c) {
        const Point3 pos{crate_center.x + (c - 1.5) * ly::kSlotPitch,
                         crate_center.y + (r - 1.0) * ly::kSlotPitch, ly::kSlotPosZ};
        scene.objects.push_back({next_id++, Category::slot, Color::none, pos, 0.0, false});
      }
    }

    const int occupied = std::clamp(config.occupied_slots, 0, 11);
    std::vector<int> slot_indices(12);
    for (int i = 0; i < 12; ++i) slot_indices[i] = i;
    rng.shuffle(slot_indices);
    scene.slot_grid.occupied.assign(slot_indices.begin(), slot_indices.begin() + occupied);
    std::sort(scene.slot_grid.occupied.begin(), scene.slot_grid.occupied.end());

    const int n_batteries =
        static_cast<int>(rng.uniform_int(config.min_batteries, config.max_batteries));
    Placer placer{rng, config.max_attempts, {}, config.battery_spacing, config.axis_margin};
    for (int i = 0; i < n_batteries; ++i) {
      const Point3 pos = placer.place(-0.28, 0.28, ly::kPadMinY + 0.02, ly::kPadMaxY - 0.02,
                                      ly::kBatteryHeight / 2);
      scene.objects.push_back({next_id++, Category::battery, Color::none, pos, 0.0, true});
    }
  } else {
    // keep every branch midpoint inside the reachable workspace
    const Point3 trunk{rng.uniform(-0.08, 0.08), rng.uniform(0.15, 0.22), 0.0};
    scene.objects.push_back({next_id++, Category::tree, Color::none, trunk, 0.0, false});
    scene.objects.push_back({next_id++, Category::pad, Color::none,
                             Point3{0.0, (ly::kPadMinY + ly::kPadMaxY) / 2, ly::kPadZ}, 0.0, false});

    scene.branch_count = 4;
    const double mid_r = (ly::kBranchInnerRadius + ly::kBranchOuterRadius) / 2;
    for (int b = 0; b < 4; ++b) {
      const Point3 pos{trunk.x + kBranchDirX[b] * mid_r, trunk.y + kBranchDirY[b] * mid_r,
                       ly::kBranchZ[b]};
      scene.objects.push_back({next_id++, Category::branch, Color::none, pos, 0.0, false});
    }

    std::vector<Color> palette{Color::red, Color::green, Color::blue};
    if (config.allow_white_mug) palette.push_back(Color::white);
    rng.shuffle(palette);

    // one mug per pad half so the clustering separation always holds
    Placer placer{rng, config.max_attempts, {}, config.mug_spacing, config.axis_margin};
    for (int i = 0; i < 2; ++i) {
      const double x_lo = i == 0 ? -0.28 : 0.16;
      const double x_hi = i == 0 ? -0.16 : 0.28;
      const Point3 pos =
          placer.place(x_lo, x_hi, ly::kPadMinY + 0.02, ly::kPadMaxY - 0.02, ly::kMugHeight / 2);
      const double yaw = rng.uniform(-M_PI / 6, M_PI / 6);
      scene.objects.push_back({next_id++, Category::mug, palette[i], pos, yaw, true});
    }
  }

  validate_scene(scene);
  return scene;
}

void validate_scene(const Scene& scene) {
  namespace ly = layout;
  std::vector<int> seen;
  for (const auto& obj : scene.objects) {
    if (std::find(seen.begin(), seen.end(), obj.id) != seen.end())
      throw Error("scene: duplicate object id");
    seen.push_back(obj.id);
    if ((obj.category == Category::slot || obj.category == Category::branch) && obj.graspable)
      throw Error("scene: fixture marked graspable");
    if (obj.graspable &&
        (std::fabs(obj.position.x) > ly::kWorkspaceHalf ||
         std::fabs(obj.position.y) > ly::kWorkspaceHalf))
      throw Error("scene: loose object outside workspace");
  }
  if (scene.task == Task::pack_battery) {
    if (scene.slot_grid.rows != 3 || scene.slot_grid.cols != 4)
      throw Error("scene: slot grid must be 3x4");
    const auto batteries = scene.ids_of(Category::battery);
    if (batteries.empty() || batteries.size() > 4)
      throw Error("scene: pack_battery needs 1-4 loose batteries");
    if (scene.ids_of(Category::slot).size() != 12)
      throw Error("scene: pack_battery needs 12 slots");
  } else {
    const auto mugs = scene.ids_of(Category::mug);
    if (mugs.size() != 2) throw Error("scene: hang_mug needs exactly 2 mugs");
    if (scene.object(mugs[0]).color == scene.object(mugs[1]).color)
      throw Error("scene: mug colors must differ");
    if (scene.ids_of(Category::branch).size() != 4)
      throw Error("scene: hang_mug needs 4 branches");
  }
}

std::string scene_to_json(const Scene& scene) {
  ordered_json j;
  j["task"] = to_string(scene.task);
  j["seed"] = scene.seed;
  j["objects"] = ordered_json::array();
  for (const auto& obj : scene.objects) {
    ordered_json o;
    o["id"] = obj.id;
    o["category"] = to_string(obj.category);
    o["color"] = to_string(obj.color);
    o["position"] = {obj.position.x, obj.position.y, obj.position.z};
    o["yaw"] = obj.yaw;
    j["objects"].push_back(o);
  }
  if (scene.task == Task::pack_battery) {
    j["slot_grid"] = {{"rows", scene.slot_grid.rows},
                      {"cols", scene.slot_grid.cols},
                      {"occupied", scene.slot_grid.occupied}};
  }
  return j.dump(2) + "\n";
}

Scene scene_from_json(const std::string& text) {
  const auto j = ordered_json::parse(text);
  Scene scene;
  scene.task = task_from_string(j.at("task").get<std::string>());
  scene.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& o : j.at("objects")) {
    SceneObject obj;
    obj.id = o.at("id").get<int>();
    obj.category = category_from_string(o.at("category").get<std::string>());
    obj.color = color_from_string(o.at("color").get<std::string>());
    const auto& pos = o.at("position");
    obj.position = {pos.at(0).get<double>(), pos.at(1).get<double>(), pos.at(2).get<double>()};
    obj.yaw = o.at("yaw").get<double>();
    obj.graspable = obj.category == Category::battery || obj.category == Category::mug;
    scene.objects.push_back(obj);
  }
  if (j.contains("slot_grid")) {
    scene.slot_grid.rows = j["slot_grid"].at("rows").get<int>();
    scene.slot_grid.cols = j["slot_grid"].at("cols").get<int>();
    scene.slot_grid.occupied = j["slot_grid"].at("occupied").get<std::vector<int>>();
  }
  scene.branch_count = static_cast<int>(scene.ids_of(Category::branch).size());
  return scene;
}

}  // namespace ambench::sim
