#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "ambench/feature_cloud.hpp"
#include "ambench/geom.hpp"
#include "ambench/instructions.hpp"
#include "ambench/spatial.hpp"

namespace ambench::ground {

/// One detected object instance: a cluster of cloud points.
struct InstanceRecord {
  sim::Category category = sim::Category::battery;
  std::vector<std::size_t> indices;  // into the owning FeatureCloud
  geom::Point3 centroid;
  int majority_instance = -1;  // dominant ground-truth id, the oracle handle
};

/// Ground-truth color lookup standing in for per-instance visual queries.
class AttributeOracle {
 public:
  AttributeOracle() = default;
  explicit AttributeOracle(const sim::Scene& scene);
  sim::Color color_of(int object_id) const;

 private:
  std::unordered_map<int, sim::Color> colors_;
};

struct GroundingConfig {
  double sim_threshold = 0.7;
  std::size_t min_cluster_points = 20;
  double eps_pack = 0.10;  // battery / slot clustering radius
  double eps_hang = 0.15;  // mug / branch clustering radius

  double eps_for(sim::Category c) const;
};

/// Per-point cosine similarity against a reference feature.
std::vector<float> similarities(const sim::FeatureCloud& cloud, const sim::ReferenceFeature& ref);

/// Threshold by similarity, cluster with DBSCAN(min_pts=1), keep clusters of
/// at least min_cluster_points, sort by centroid (x, y, z).
std::vector<InstanceRecord> detect(const sim::FeatureCloud& cloud,
                                   const sim::ReferenceFeature& ref, double sim_threshold,
                                   double eps, std::size_t min_cluster_points = 20);

const InstanceRecord& sel_pos(const std::vector<InstanceRecord>& instances,
                              spatial::Relation relation);

const InstanceRecord& sel_name(const std::vector<InstanceRecord>& instances,
                               sim::Color attribute, const AttributeOracle& oracle);

struct Selector {
  enum class Kind { position, attribute, exclude, any };
  Kind kind = Kind::any;
  spatial::Relation relation = spatial::Relation::any;
  sim::Color attribute = sim::Color::none;
  std::shared_ptr<Selector> excluded;  // kind == exclude

  std::string to_sexpr() const;
};

struct ObjectQuery {
  sim::Category category = sim::Category::battery;
  Selector selector;
};

/// Executable surrogate for generated perception code: one pick query and
/// one place query over detected instances.
struct SelectionProgram {
  ObjectQuery pick;
  ObjectQuery place;

  std::string to_sexpr() const;
};

/// Deterministic compilation from structured instruction components.
SelectionProgram compile_program(const lang::Instruction& instruction);

struct ProgramResult {
  InstanceRecord pick;
  InstanceRecord place;
};

/// Runs detect + selectors; `refs` must cover every category the program
/// detects and `seed` only feeds the uniform choice behind slack ("any")
/// selectors. Errors carry the failing stage.
ProgramResult run_program(const SelectionProgram& program, const sim::FeatureCloud& cloud,
                          const std::vector<sim::ReferenceFeature>& refs,
                          const AttributeOracle& oracle, std::uint64_t seed,
                          const GroundingConfig& config = {});

/// Per-point binary attention over the cloud order.
using AttentionMap = std::vector<std::uint8_t>;

AttentionMap build_attention(const sim::FeatureCloud& cloud, const InstanceRecord& pick,
                             const InstanceRecord& place);

/// Points where the map is set.
geom::PointSet attention_points(const sim::FeatureCloud& cloud, const AttentionMap& map);

std::vector<geom::Mask2D> project_attention_2d(const AttentionMap& map,
                                               const sim::FeatureCloud& cloud,
                                               const std::vector<geom::Camera>& cameras,
                                               int dilation_radius);

/// "ATT1" binary container, aligned with the companion cloud file.
void write_att(const std::string& path, const AttentionMap& map);
AttentionMap read_att(const std::string& path);

}  // namespace ambench::ground
