#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ambench/geom.hpp"
#include "ambench/rng.hpp"
#include "ambench/scene.hpp"

namespace ambench::sim {

/// Fused observation stand-in: positions plus per-point semantic features
/// and ground-truth labels used by the benchmark oracles.
struct FeatureCloud {
  geom::PointSet points;
  std::vector<float> features;  // row-major, size() == points.size() * feature_dim
  int feature_dim = 0;
  std::vector<std::int32_t> gt_instance;  // owning object id per point
  std::vector<Category> gt_category;

  std::size_t size() const { return points.size(); }
  const float* feature_row(std::size_t i) const { return features.data() + i * feature_dim; }

  /// Indices of all points owned by the given object id.
  std::vector<std::size_t> instance_indices(int object_id) const;
};

struct ReferenceFeature {
  Category category = Category::battery;
  std::vector<float> vector;  // unit norm
};

struct RenderConfig {
  int feature_dim = 16;
  int samples_per_object = 300;
  int max_points = 8000;            // FPS cap after concatenating all objects
  std::uint64_t basis_seed = 0xa11ce;  // orientation of the category basis
};

/// Mutually orthonormal per-category reference vectors (a seeded rotation of
/// the one-hot basis).
std::vector<ReferenceFeature> reference_features(const RenderConfig& config = {});
ReferenceFeature reference_feature(Category c, const RenderConfig& config = {});

/// Sample every object surface, attach noisy unit features around each
/// category reference, and FPS-cap the result at max_points.
FeatureCloud render_feature_cloud(const Scene& scene, double noise_sigma,
                                  std::uint64_t seed, const RenderConfig& config = {});

/// Surface point samples for a single object (world frame). Occupied-slot
/// plugs are emitted as part of the crate.
void sample_object_surface(Rng& rng, const SceneObject& object, const Scene& scene, int count,
                           geom::PointSet& out);

/// "FCD1" little-endian binary container.
void write_fcd(const std::string& path, const FeatureCloud& cloud);
FeatureCloud read_fcd(const std::string& path);

double cosine_similarity(const float* a, const float* b, int dim);

}  // namespace ambench::sim
