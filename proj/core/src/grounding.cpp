#include "ambench/grounding.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <map>

#include "ambench/error.hpp"
#include "ambench/rng.hpp"

namespace ambench::ground {

using sim::Category;
using sim::Color;
using sim::FeatureCloud;

AttributeOracle::AttributeOracle(const sim::Scene& scene) {
  for (const auto& obj : scene.objects) colors_[obj.id] = obj.color;
}

Color AttributeOracle::color_of(int object_id) const {
  const auto it = colors_.find(object_id);
  return it == colors_.end() ? Color::none : it->second;
}

double GroundingConfig::eps_for(Category c) const {
  switch (c) {
    case Category::mug:
    case Category::branch:
    case Category::tree:
      return eps_hang;
    default:
      return eps_pack;
  }
}

std::vector<float> similarities(const FeatureCloud& cloud, const sim::ReferenceFeature& ref) {
  std::vector<float> out(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i)
    out[i] = static_cast<float>(
        sim::cosine_similarity(cloud.feature_row(i), ref.vector.data(), cloud.feature_dim));
  return out;
}

std::vector<InstanceRecord> detect(const FeatureCloud& cloud, const sim::ReferenceFeature& ref,
                                   double sim_threshold, double eps,
                                   std::size_t min_cluster_points) {
  if (!(sim_threshold > 0.0) || !(sim_threshold <= 1.0))
    throw Error("detect: sim_threshold must be in (0, 1]");
  const auto sims = similarities(cloud, ref);

  std::vector<std::size_t> attended;
  for (std::size_t i = 0; i < cloud.size(); ++i)
    if (sims[i] >= sim_threshold) attended.push_back(i);
  if (attended.empty()) return {};

  geom::PointSet pts;
  pts.reserve(attended.size());
  for (auto i : attended) pts.push_back(cloud.points[i]);
  const auto labels = geom::dbscan(pts, eps, 1);

  std::map<int, InstanceRecord> clusters;
  for (std::size_t i = 0; i < attended.size(); ++i) {
    if (labels[i] < 0) continue;
    auto& rec = clusters[labels[i]];
    rec.category = ref.category;
    rec.indices.push_back(attended[i]);
  }

  std::vector<InstanceRecord> out;
  for (auto& [label, rec] : clusters) {
    if (rec.indices.size() < min_cluster_points) continue;
    geom::Point3 sum;
    std::map<int, int> votes;
    for (auto idx : rec.indices) {
      sum = sum + cloud.points[idx];
      ++votes[cloud.gt_instance[idx]];
    }
    rec.centroid = sum * (1.0 / static_cast<double>(rec.indices.size()));
    int best_id = -1, best_count = -1;
    for (const auto& [id, count] : votes)
      if (count > best_count) {
        best_count = count;
        best_id = id;
      }
    rec.majority_instance = best_id;
    out.push_back(std::move(rec));
  }
  std::sort(out.begin(), out.end(), [](const InstanceRecord& a, const InstanceRecord& b) {
    if (a.centroid.x != b.centroid.x) return a.centroid.x < b.centroid.x;
    if (a.centroid.y != b.centroid.y) return a.centroid.y < b.centroid.y;
    return a.centroid.z < b.centroid.z;
  });
  return out;
}

const InstanceRecord& sel_pos(const std::vector<InstanceRecord>& instances,
                              spatial::Relation relation) {
  if (instances.empty()) throw Error("empty instance list", FailStage::perception);
  std::vector<geom::Point3> centroids;
  centroids.reserve(instances.size());
  for (const auto& rec : instances) centroids.push_back(rec.centroid);
  return instances[spatial::select(centroids, relation)];
}

const InstanceRecord& sel_name(const std::vector<InstanceRecord>& instances, Color attribute,
                               const AttributeOracle& oracle) {
  if (instances.empty()) throw Error("empty instance list", FailStage::perception);
  for (const auto& rec : instances)
    if (oracle.color_of(rec.majority_instance) == attribute) return rec;
  throw Error("attribute not found", FailStage::perception);
}

namespace {

Selector selector_for(const lang::DescriptiveComponent& component) {
  Selector s;
  if (component.is_color()) {
    s.kind = Selector::Kind::attribute;
    s.attribute = component.color();
    return s;
  }
  s.kind = Selector::Kind::position;
  using lang::Descriptor;
  using spatial::Relation;
  switch (component.descriptor) {
    case Descriptor::left_most: s.relation = Relation::leftmost; break;
    case Descriptor::right_most: s.relation = Relation::rightmost; break;
    case Descriptor::front_most: s.relation = Relation::frontmost; break;
    case Descriptor::back_most: s.relation = Relation::backmost; break;
    case Descriptor::furthest: s.relation = Relation::furthest; break;
    case Descriptor::nearest: s.relation = Relation::nearest; break;
    case Descriptor::row_front: s.relation = Relation::row_front; break;
    case Descriptor::row_middle: s.relation = Relation::row_middle; break;
    case Descriptor::row_back: s.relation = Relation::row_back; break;
    case Descriptor::col_left: s.relation = Relation::col_left; break;
    case Descriptor::col_middle: s.relation = Relation::col_middle; break;
    case Descriptor::col_right: s.relation = Relation::col_right; break;
    case Descriptor::topmost_right: s.relation = Relation::topmost_right; break;
    case Descriptor::topmost_left: s.relation = Relation::topmost_left; break;
    case Descriptor::middle_right: s.relation = Relation::middle_right; break;
    default:
      throw Error("unsupported descriptor", FailStage::codegen);
  }
  return s;
}

const char* color_name(Color c) { return sim::to_string(c); }

}  // namespace

std::string Selector::to_sexpr() const {
  switch (kind) {
    case Kind::position: return std::string("(pos ") + spatial::to_string(relation) + ")";
    case Kind::attribute: return std::string("(name ") + color_name(attribute) + ")";
    case Kind::exclude: return "(other " + (excluded ? excluded->to_sexpr() : "?") + ")";
    case Kind::any: return "(any)";
  }
  return "(any)";
}

std::string SelectionProgram::to_sexpr() const {
  auto query = [](const ObjectQuery& q) {
    return "(select (detect " + std::string(sim::to_string(q.category)) + ") " +
           q.selector.to_sexpr() + ")";
  };
  return "(pair " + query(pick) + " " + query(place) + ")";
}

SelectionProgram compile_program(const lang::Instruction& instruction) {
  SelectionProgram program;
  const bool pack = instruction.task == sim::Task::pack_battery;
  program.pick.category = pack ? Category::battery : Category::mug;
  program.place.category = pack ? Category::slot : Category::branch;

  if (instruction.pick_component) {
    program.pick.selector = selector_for(*instruction.pick_component);
  } else if (instruction.pick_excluded) {
    Selector s;
    s.kind = Selector::Kind::exclude;
    s.excluded = std::make_shared<Selector>(selector_for(*instruction.pick_excluded));
    program.pick.selector = s;
  } else {
    program.pick.selector.kind = Selector::Kind::any;
  }

  if (instruction.place_component) {
    program.place.selector = selector_for(*instruction.place_component);
  } else {
    program.place.selector.kind = Selector::Kind::any;
  }
  return program;
}

namespace {

const InstanceRecord& apply_selector(const std::vector<InstanceRecord>& instances,
                                     const Selector& selector, const AttributeOracle& oracle,
                                     Rng& rng) {
  switch (selector.kind) {
    case Selector::Kind::position:
      return sel_pos(instances, selector.relation);
    case Selector::Kind::attribute:
      return sel_name(instances, selector.attribute, oracle);
    case Selector::Kind::any: {
      if (instances.empty()) throw Error("empty instance list", FailStage::perception);
      return instances[rng.index(instances.size())];
    }
    case Selector::Kind::exclude: {
      if (!selector.excluded) throw Error("unsupported descriptor", FailStage::codegen);
      const auto& drop = apply_selector(instances, *selector.excluded, oracle, rng);
      for (const auto& rec : instances)
        if (rec.majority_instance != drop.majority_instance) return rec;
      throw Error("exclusion left no candidates", FailStage::perception);
    }
  }
  throw Error("unsupported descriptor", FailStage::codegen);
}

}  // namespace

ProgramResult run_program(const SelectionProgram& program, const FeatureCloud& cloud,
                          const std::vector<sim::ReferenceFeature>& refs,
                          const AttributeOracle& oracle, std::uint64_t seed,
                          const GroundingConfig& config) {
  Rng rng(seed ^ 0x11d5a7ULL);

  auto run_query = [&](const ObjectQuery& query) -> InstanceRecord {
    const sim::ReferenceFeature* ref = nullptr;
    for (const auto& r : refs)
      if (r.category == query.category) ref = &r;
    if (!ref)
      throw Error(std::string("missing reference feature for ") + sim::to_string(query.category),
                  FailStage::perception);
    const auto instances = detect(cloud, *ref, config.sim_threshold,
                                  config.eps_for(query.category), config.min_cluster_points);
    if (instances.empty())
      throw Error(std::string("no instances of ") + sim::to_string(query.category),
                  FailStage::perception);
    return apply_selector(instances, query.selector, oracle, rng);
  };

  ProgramResult result;
  result.pick = run_query(program.pick);
  result.place = run_query(program.place);
  return result;
}

AttentionMap build_attention(const FeatureCloud& cloud, const InstanceRecord& pick,
                             const InstanceRecord& place) {
  AttentionMap map(cloud.size(), 0);
  for (auto idx : pick.indices) map.at(idx) = 1;
  for (auto idx : place.indices) map.at(idx) = 1;
  return map;
}

geom::PointSet attention_points(const FeatureCloud& cloud, const AttentionMap& map) {
  geom::PointSet out;
  for (std::size_t i = 0; i < map.size(); ++i)
    if (map[i]) out.push_back(cloud.points[i]);
  return out;
}

std::vector<geom::Mask2D> project_attention_2d(const AttentionMap& map, const FeatureCloud& cloud,
                                               const std::vector<geom::Camera>& cameras,
                                               int dilation_radius) {
  std::vector<geom::Mask2D> masks;
  masks.reserve(cameras.size());
  for (const auto& cam : cameras) {
    geom::Mask2D mask(cam.width, cam.height);
    const auto projections = geom::project(attention_points(cloud, map), cam);
    for (const auto& p : projections) {
      if (!p.visible) continue;
      mask.set(static_cast<int>(std::lround(p.u)), static_cast<int>(std::lround(p.v)), 1);
    }
    masks.push_back(geom::dilate_mask(mask, dilation_radius));
  }
  return masks;
}

void write_att(const std::string& path, const AttentionMap& map) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw Error("cannot open " + path);
  std::fwrite("ATT1", 1, 4, f);
  const std::uint32_t m = static_cast<std::uint32_t>(map.size());
  std::fwrite(&m, sizeof(m), 1, f);
  std::fwrite(map.data(), 1, map.size(), f);
  std::fclose(f);
}

AttentionMap read_att(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw Error("cannot open " + path);
  char magic[4];
  std::uint32_t m = 0;
  if (std::fread(magic, 1, 4, f) != 4 || std::memcmp(magic, "ATT1", 4) != 0 ||
      std::fread(&m, sizeof(m), 1, f) != 1) {
    std::fclose(f);
    throw Error("not an ATT1 file");
  }
  AttentionMap map(m);
  const bool ok = std::fread(map.data(), 1, m, f) == m;
  std::fclose(f);
  if (!ok) throw Error("short read");
  return map;
}

}  // namespace ambench::ground
