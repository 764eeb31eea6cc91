#include "ambench/instructions.hpp"

#include <algorithm>
#include <set>

#include <nlohmann/json.hpp>

#include "ambench/error.hpp"

namespace ambench::lang {

using sim::Category;
using sim::Color;
using sim::Scene;
using sim::Task;

const char* to_string(Slackness s) {
  switch (s) {
    case Slackness::none: return "none";
    case Slackness::pick_slack: return "pick_slack";
    case Slackness::place_slack: return "place_slack";
    case Slackness::both_slack: return "both_slack";
  }
  return "none";
}

bool DescriptiveComponent::is_color() const {
  return descriptor == Descriptor::red || descriptor == Descriptor::green ||
         descriptor == Descriptor::blue || descriptor == Descriptor::white;
}

sim::Color DescriptiveComponent::color() const {
  switch (descriptor) {
    case Descriptor::red: return Color::red;
    case Descriptor::green: return Color::green;
    case Descriptor::blue: return Color::blue;
    case Descriptor::white: return Color::white;
    default: return Color::none;
  }
}

std::string DescriptiveComponent::text() const {
  const std::string noun = sim::to_string(category);
  switch (descriptor) {
    case Descriptor::left_most: return "left-most " + noun;
    case Descriptor::right_most: return "right-most " + noun;
    case Descriptor::front_most: return "front-most " + noun;
    case Descriptor::back_most: return "back-most " + noun;
    case Descriptor::furthest: return "furthest " + noun;
    case Descriptor::nearest: return "nearest " + noun;
    case Descriptor::row_front: return noun + " on the front-most row";
    case Descriptor::row_middle: return noun + " on the middle row";
    case Descriptor::row_back: return noun + " on the back-most row";
    case Descriptor::col_left: return noun + " on left column";
    case Descriptor::col_middle: return noun + " on the middle columns";
    case Descriptor::col_right: return noun + " on the right column";
    case Descriptor::topmost_right: return "right-topmost " + noun;
    case Descriptor::topmost_left: return "left-topmost " + noun;
    case Descriptor::middle_right: return "right-middle " + noun;
    case Descriptor::red: return "red " + noun;
    case Descriptor::green: return "green " + noun;
    case Descriptor::blue: return "blue " + noun;
    case Descriptor::white: return "white " + noun;
  }
  return noun;
}

std::vector<DescriptiveComponent> component_library(Category category, bool allow_white) {
  std::vector<DescriptiveComponent> out;
  auto add = [&](Descriptor d) { out.push_back({category, d}); };
  switch (category) {
    case Category::mug:
      add(Descriptor::left_most);
      add(Descriptor::right_most);
      if (allow_white) add(Descriptor::white);
      add(Descriptor::red);
      add(Descriptor::blue);
      add(Descriptor::green);
      break;
    case Category::branch:
      add(Descriptor::furthest);
      add(Descriptor::topmost_right);
      add(Descriptor::topmost_left);
      add(Descriptor::middle_right);
      break;
    case Category::battery:
      add(Descriptor::left_most);
      add(Descriptor::right_most);
      add(Descriptor::front_most);
      add(Descriptor::back_most);
      break;
    case Category::slot:
      add(Descriptor::furthest);
      add(Descriptor::nearest);
      add(Descriptor::row_front);
      add(Descriptor::row_middle);
      add(Descriptor::row_back);
      add(Descriptor::col_left);
      add(Descriptor::col_middle);
      add(Descriptor::col_right);
      break;
    default:
      throw Error("component_library: no descriptors for this category");
  }
  return out;
}

namespace {

std::vector<InstructionTemplate> make_hang_templates() {
  std::vector<InstructionTemplate> t;
  int id = 0;
  auto add = [&](const char* text, Slackness s, TargetRule pick, TargetRule place) {
    t.push_back({id++, text, s, pick, place});
  };
  const auto D = TargetRule::direct, E = TargetRule::exclude, S = TargetRule::slack;

  add("Hang the {mug} on the {branch}.", Slackness::none, D, D);
  add("I want to use the {other_mug} to drink some water. Put away the other one on the {branch}.",
      Slackness::none, E, D);
  add("I want to use the {other_mug} to drink some water. Put away the other mug on the {branch}.",
      Slackness::none, E, D);
  add("I will use the {other_mug} to drink some water. Hang the {mug} on the {branch}.",
      Slackness::none, D, D);
  add("Hang the {mug} on the {other_branch}. Sorry, the {branch}.", Slackness::none, D, D);
  add("There are two mugs. Keep {other_mug} on the table, put the other one on {branch}.",
      Slackness::none, E, D);
  add("I will not use this {mug} now. Hang it on {branch}", Slackness::none, D, D);
  add("Put Bob's mug, the {mug}, on the {branch}.", Slackness::none, D, D);

  add("Hang a mug on the {branch}.", Slackness::pick_slack, S, D);
  add("Put away a mug on the {branch}.", Slackness::pick_slack, S, D);
  add("Hang a mug on the {other_branch}. Sorry, the {branch}.", Slackness::pick_slack, S, D);

  add("Hang the {mug} on a branch.", Slackness::place_slack, D, S);
  add("I want to use the {other_mug} to drink some water. Put away the other one on a branch.",
      Slackness::place_slack, E, S);
  add("I want to use the {other_mug} to drink some water. Put away the other mug on a branch.",
      Slackness::place_slack, E, S);
  add("I will use the {other_mug} to drink some water. Hang the {mug} on a branch.",
      Slackness::place_slack, D, S);
  add("Hang the {other_mug} on a branch. Sorry, the {mug}.", Slackness::place_slack, D, S);
  add("There are two mugs. Keep {other_mug} on the table, put the other one on a branch.",
      Slackness::place_slack, E, S);
  add("I will not use this {mug} now. Hang it on a branch", Slackness::place_slack, D, S);
  add("Put Bob's mug, the {mug}, on the a branch.", Slackness::place_slack, D, S);

  add("Hang a mug on a branch.", Slackness::both_slack, S, S);
  add("There are two mugs. Keep one on the table, put the other one on a branch.",
      Slackness::both_slack, S, S);
  return t;
}

std::vector<InstructionTemplate> make_pack_templates() {
  std::vector<InstructionTemplate> t;
  int id = 0;
  auto add = [&](const char* text, Slackness s, TargetRule pick, TargetRule place) {
    t.push_back({id++, text, s, pick, place});
  };
  const auto D = TargetRule::direct, S = TargetRule::slack;

  add("Pick the {battery} outside the crate into the {slot}.", Slackness::none, D, D);
  add("I need to use the {other_battery}. Put away the {battery} outside the box in the {slot}.",
      Slackness::none, D, D);
  add("The desk is too messy. Put away the {battery} outside the box into the {slot}.",
      Slackness::none, D, D);
  add("I want to put the {battery} outside the crate into the {other_slot}, oh sorry, the {slot}.",
      Slackness::none, D, D);
  add("You should make the table more tidy, Just start from putting the {battery} outside the "
      "crate into the {slot}.",
      Slackness::none, D, D);

  add("Pick a battery outside the crate into the {slot}.", Slackness::pick_slack, S, D);
  add("The desk is too messy. Put away a battery outside the crate into the {slot}.",
      Slackness::pick_slack, S, D);
  add("I want to put a battery outside the crate into the {other_slot}, oh sorry, the {slot}.",
      Slackness::pick_slack, S, D);
  add("I want to put a battery outside the crate into the {slot}.", Slackness::pick_slack, S, D);

  add("Pick the {battery} outside the crate into a slot.", Slackness::place_slack, D, S);
  add("I need to use the {other_battery}. Put away the {battery} outside the crate in a slot.",
      Slackness::place_slack, D, S);
  add("The desk is too messy. Put away the {battery} outside the crate into a slot.",
      Slackness::place_slack, D, S);
  add("I want to put the {other_battery} into a slot, oh sorry, the {battery} outside the crate.",
      Slackness::place_slack, D, S);
  add("You should make the table more tidy, Just start from putting the {battery} outside the "
      "crate into a slot.",
      Slackness::place_slack, D, S);

  add("Put a battery outside the crate on a slot.", Slackness::both_slack, S, S);
  add("There are some batteries outside the crate. Put one into a slot.", Slackness::both_slack,
      S, S);
  return t;
}

spatial::Relation to_relation(Descriptor d) {
  switch (d) {
    case Descriptor::left_most: return spatial::Relation::leftmost;
    case Descriptor::right_most: return spatial::Relation::rightmost;
    case Descriptor::front_most: return spatial::Relation::frontmost;
    case Descriptor::back_most: return spatial::Relation::backmost;
    case Descriptor::furthest: return spatial::Relation::furthest;
    case Descriptor::nearest: return spatial::Relation::nearest;
    case Descriptor::topmost_right: return spatial::Relation::topmost_right;
    case Descriptor::topmost_left: return spatial::Relation::topmost_left;
    case Descriptor::middle_right: return spatial::Relation::middle_right;
    default: throw Error("descriptor is not spatial");
  }
}

std::vector<int> vacant_slot_ids(const Scene& scene) {
  std::vector<int> out;
  int index = 0;
  for (const auto& obj : scene.objects) {
    if (obj.category != Category::slot) continue;
    if (!scene.slot_grid.is_occupied(index)) out.push_back(obj.id);
    ++index;
  }
  return out;
}

constexpr double kSelectionMargin = 0.02;

}  // namespace

const std::vector<InstructionTemplate>& instruction_templates(Task task) {
  static const std::vector<InstructionTemplate> hang = make_hang_templates();
  static const std::vector<InstructionTemplate> pack = make_pack_templates();
  return task == Task::hang_mug ? hang : pack;
}

std::vector<DescriptiveComponent> Instruction::all_components() const {
  std::vector<DescriptiveComponent> out;
  if (pick_component) out.push_back(*pick_component);
  if (pick_excluded) out.push_back(*pick_excluded);
  if (place_component) out.push_back(*place_component);
  out.insert(out.end(), distractors.begin(), distractors.end());
  return out;
}

std::vector<int> denote(const Scene& scene, const DescriptiveComponent& component) {
  if (component.is_color()) {
    std::vector<int> out;
    for (const auto& obj : scene.objects)
      if (obj.category == component.category && obj.color == component.color())
        out.push_back(obj.id);
    return out;
  }

  // structural row/column components: vacant slots in that grid band
  if (component.category == Category::slot) {
    const auto vacant = vacant_slot_ids(scene);
    auto in_band = [&](int id) {
      const auto [row, col] = scene.slot_row_col(id);
      switch (component.descriptor) {
        case Descriptor::row_front: return row == 0;
        case Descriptor::row_middle: return row == 1;
        case Descriptor::row_back: return row == 2;
        case Descriptor::col_left: return col == 0;
        case Descriptor::col_middle: return col == 1 || col == 2;
        case Descriptor::col_right: return col == 3;
        default: return false;
      }
    };
    switch (component.descriptor) {
      case Descriptor::row_front:
      case Descriptor::row_middle:
      case Descriptor::row_back:
      case Descriptor::col_left:
      case Descriptor::col_middle:
      case Descriptor::col_right: {
        std::vector<int> out;
        for (int id : vacant)
          if (in_band(id)) out.push_back(id);
        return out;
      }
      default: {
        if (vacant.empty()) return {};
        std::vector<geom::Point3> pos;
        for (int id : vacant) pos.push_back(scene.object(id).position);
        return {vacant[spatial::select(pos, to_relation(component.descriptor))]};
      }
    }
  }

  std::vector<int> candidates;
  for (const auto& obj : scene.objects)
    if (obj.category == component.category) candidates.push_back(obj.id);
  if (candidates.empty()) return {};
  std::vector<geom::Point3> pos;
  for (int id : candidates) pos.push_back(scene.object(id).position);
  return {candidates[spatial::select(pos, to_relation(component.descriptor))]};
}

bool check_scene_matches(const Scene& scene,
                         const std::vector<DescriptiveComponent>& components) {
  for (const auto& comp : components) {
    if (denote(scene, comp).empty()) return false;
    if (comp.is_color()) continue;
    // distance-based winners must be unambiguous so that selection over
    // perceived centroids lands on the same object
    if (comp.descriptor == Descriptor::furthest || comp.descriptor == Descriptor::nearest) {
      std::vector<int> candidates = comp.category == Category::slot
                                        ? vacant_slot_ids(scene)
                                        : scene.ids_of(comp.category);
      if (candidates.size() > 1) {
        std::vector<geom::Point3> pos;
        for (int id : candidates) pos.push_back(scene.object(id).position);
        if (spatial::select_margin(pos, to_relation(comp.descriptor)) < kSelectionMargin)
          return false;
      }
    }
  }
  return true;
}

Targets extract_targets(const Scene& scene, const Instruction& instruction) {
  Targets targets;
  const Category pick_cat =
      instruction.task == Task::pack_battery ? Category::battery : Category::mug;

  if (instruction.pick_component) {
    targets.pick_ids = denote(scene, *instruction.pick_component);
  } else if (instruction.pick_excluded) {
    const auto excluded = denote(scene, *instruction.pick_excluded);
    for (int id : scene.ids_of(pick_cat))
      if (std::find(excluded.begin(), excluded.end(), id) == excluded.end())
        targets.pick_ids.push_back(id);
  } else {
    targets.pick_ids = scene.ids_of(pick_cat);
  }

  if (instruction.place_component) {
    targets.place_ids = denote(scene, *instruction.place_component);
  } else if (instruction.task == Task::pack_battery) {
    targets.place_ids = vacant_slot_ids(scene);
  } else {
    targets.place_ids = scene.ids_of(Category::branch);
  }
  return targets;
}

std::vector<std::pair<int, int>> allowed_pairs(const Targets& targets) {
  std::vector<std::pair<int, int>> out;
  for (int p : targets.pick_ids)
    for (int q : targets.place_ids) out.emplace_back(p, q);
  return out;
}

namespace {

void replace_hole(std::string& text, const std::string& hole, const std::string& value) {
  for (std::size_t at = text.find(hole); at != std::string::npos; at = text.find(hole))
    text.replace(at, hole.size(), value);
}

bool disjoint(const std::vector<int>& a, const std::vector<int>& b) {
  for (int x : a)
    if (std::find(b.begin(), b.end(), x) != b.end()) return false;
  return true;
}

}  // namespace

Instruction sample_instruction(Task task, const Scene& scene, Rng& rng,
                               const InstructionConfig& config) {
  const auto& templates = instruction_templates(task);
  const Category pick_cat = task == Task::pack_battery ? Category::battery : Category::mug;
  const Category place_cat = task == Task::pack_battery ? Category::slot : Category::branch;
  const auto pick_lib = component_library(pick_cat, config.allow_white_mug);
  const auto place_lib = component_library(place_cat);

  for (int attempt = 0; attempt < config.max_attempts; ++attempt) {
    const auto slack = static_cast<Slackness>(rng.index(4));
    std::vector<const InstructionTemplate*> pool;
    for (const auto& t : templates)
      if (t.slackness == slack) pool.push_back(&t);
    const auto& tmpl = *pool[rng.index(pool.size())];

    Instruction instr;
    instr.scene_id = std::string(sim::to_string(scene.task)) + "-" + std::to_string(scene.seed);
    instr.task = task;
    instr.template_id = tmpl.id;
    instr.slackness = tmpl.slackness;
    instr.text = tmpl.text;

    const std::string pick_hole = "{" + std::string(sim::to_string(pick_cat)) + "}";
    const std::string place_hole = "{" + std::string(sim::to_string(place_cat)) + "}";
    const std::string other_pick_hole = "{other_" + std::string(sim::to_string(pick_cat)) + "}";
    const std::string other_place_hole = "{other_" + std::string(sim::to_string(place_cat)) + "}";

    if (tmpl.pick == TargetRule::direct)
      instr.pick_component = pick_lib[rng.index(pick_lib.size())];
    if (tmpl.pick == TargetRule::exclude)
      instr.pick_excluded = pick_lib[rng.index(pick_lib.size())];
    if (tmpl.place == TargetRule::direct)
      instr.place_component = place_lib[rng.index(place_lib.size())];
    if (tmpl.text.find(other_pick_hole) != std::string::npos &&
        tmpl.pick != TargetRule::exclude)
      instr.distractors.push_back(pick_lib[rng.index(pick_lib.size())]);
    if (tmpl.text.find(other_place_hole) != std::string::npos)
      instr.distractors.push_back(place_lib[rng.index(place_lib.size())]);

    if (!check_scene_matches(scene, instr.all_components())) continue;

    // companion references must denote different objects than the target
    bool coherent = true;
    for (const auto& d : instr.distractors) {
      if (d.category == pick_cat && instr.pick_component &&
          !disjoint(denote(scene, d), denote(scene, *instr.pick_component)))
        coherent = false;
      if (d.category == place_cat && instr.place_component &&
          !disjoint(denote(scene, d), denote(scene, *instr.place_component)))
        coherent = false;
    }
    if (instr.pick_excluded && instr.pick_component &&
        !disjoint(denote(scene, *instr.pick_excluded), denote(scene, *instr.pick_component)))
      coherent = false;
    if (!coherent) continue;

    const auto targets = extract_targets(scene, instr);
    if (targets.pick_ids.empty() || targets.place_ids.empty()) continue;
    if (tmpl.slackness == Slackness::none &&
        (targets.pick_ids.size() != 1 || targets.place_ids.size() != 1))
      continue;

    std::string text = tmpl.text;
    if (instr.pick_component) replace_hole(text, pick_hole, instr.pick_component->text());
    if (instr.pick_excluded) replace_hole(text, other_pick_hole, instr.pick_excluded->text());
    if (instr.place_component) replace_hole(text, place_hole, instr.place_component->text());
    for (const auto& d : instr.distractors)
      replace_hole(text, d.category == pick_cat ? other_pick_hole : other_place_hole, d.text());
    if (text.find('{') != std::string::npos) throw Error("unfilled template hole");
    instr.text = text;
    return instr;
  }
  throw Error("no consistent instruction");
}

std::string instruction_to_jsonl(const Instruction& instruction, const Targets& targets) {
  nlohmann::ordered_json j;
  j["scene_id"] = instruction.scene_id;
  j["text"] = instruction.text;
  j["slackness"] = to_string(instruction.slackness);
  j["pick_ids"] = targets.pick_ids;
  j["place_ids"] = targets.place_ids;
  return j.dump();
}

}  // namespace ambench::lang
