#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ambench/rng.hpp"
#include "ambench/scene.hpp"
#include "ambench/spatial.hpp"

namespace ambench::lang {

/// Degree of under-specification in an instruction.
enum class Slackness { none, pick_slack, place_slack, both_slack };
const char* to_string(Slackness s);

/// Object-centric descriptor drawn from the per-task component libraries.
enum class Descriptor {
  left_most,
  right_most,
  front_most,
  back_most,
  furthest,
  nearest,
  row_front,
  row_middle,
  row_back,
  col_left,
  col_middle,
  col_right,
  topmost_right,
  topmost_left,
  middle_right,
  red,
  green,
  blue,
  white,
};

struct DescriptiveComponent {
  sim::Category category = sim::Category::mug;
  Descriptor descriptor = Descriptor::left_most;

  bool is_color() const;
  sim::Color color() const;
  /// Phrase used to fill a template hole, e.g. "left-most mug",
  /// "slot on the middle columns".
  std::string text() const;
};

/// All components valid for a hole of the given category.
std::vector<DescriptiveComponent> component_library(sim::Category category,
                                                    bool allow_white = false);

enum class TargetRule { direct, exclude, slack };

struct InstructionTemplate {
  int id = 0;
  std::string text;  // with {mug}/{branch}/{battery}/{slot}/{other_*} holes
  Slackness slackness = Slackness::none;
  TargetRule pick = TargetRule::direct;
  TargetRule place = TargetRule::direct;
};

const std::vector<InstructionTemplate>& instruction_templates(sim::Task task);

struct Instruction {
  std::string scene_id;
  sim::Task task = sim::Task::pack_battery;
  int template_id = 0;
  Slackness slackness = Slackness::none;
  std::string text;
  // grounding roles, resolved from the template
  std::optional<DescriptiveComponent> pick_component;  // direct pick reference
  std::optional<DescriptiveComponent> pick_excluded;   // "the other one" exclusion
  std::optional<DescriptiveComponent> place_component;
  std::vector<DescriptiveComponent> distractors;  // other_* fills with no grounding role

  std::vector<DescriptiveComponent> all_components() const;
};

/// Object ids a component denotes in the scene (vacant slots for slot
/// components, all matches for colors, argmin/argmax winners as singletons).
std::vector<int> denote(const sim::Scene& scene, const DescriptiveComponent& component);

/// True iff every component denotes at least one object, and argmin/argmax
/// components win by a clear margin (keeps the perceptual route and the
/// symbolic route in agreement).
bool check_scene_matches(const sim::Scene& scene,
                         const std::vector<DescriptiveComponent>& components);

struct Targets {
  std::vector<int> pick_ids;
  std::vector<int> place_ids;
};

/// All object ids compatible with the instruction; slack roles return the
/// full candidate set. The cross product forms the reward's allowed pairs.
Targets extract_targets(const sim::Scene& scene, const Instruction& instruction);

std::vector<std::pair<int, int>> allowed_pairs(const Targets& targets);

struct InstructionConfig {
  bool allow_white_mug = false;
  int max_attempts = 100;
};

/// Uniformly sample (class, template, components) and resample until the
/// scene supports the instruction. No-slack draws additionally require the
/// pick and place references to denote exactly one object each.
Instruction sample_instruction(sim::Task task, const sim::Scene& scene, Rng& rng,
                               const InstructionConfig& config = {});

std::string instruction_to_jsonl(const Instruction& instruction, const Targets& targets);

}  // namespace ambench::lang
