#include "ambench/feature_cloud.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <numeric>

#include "ambench/error.hpp"
#include "ambench/rng.hpp"

namespace ambench::sim {

using geom::Point3;

std::vector<std::size_t> FeatureCloud::instance_indices(int object_id) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < gt_instance.size(); ++i)
    if (gt_instance[i] == object_id) out.push_back(i);
  return out;
}

double cosine_similarity(const float* a, const float* b, int dim) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (int i = 0; i < dim; ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / std::sqrt(na * nb);
}

std::vector<ReferenceFeature> reference_features(const RenderConfig& config) {
  // Gram-Schmidt over seeded Gaussian vectors: one orthonormal reference per
  // category, identical for every cloud rendered with the same basis seed.
  Rng rng(config.basis_seed ^ 0xfeed5eedULL);
  std::vector<ReferenceFeature> refs;
  for (int c = 0; c < kCategoryCount; ++c) {
    std::vector<double> v(config.feature_dim);
    for (auto& x : v) x = rng.normal();
    for (const auto& prev : refs) {
      double dot = 0.0;
      for (int i = 0; i < config.feature_dim; ++i) dot += v[i] * prev.vector[i];
      for (int i = 0; i < config.feature_dim; ++i) v[i] -= dot * prev.vector[i];
    }
    double norm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
    ReferenceFeature ref;
    ref.category = static_cast<Category>(c);
    ref.vector.resize(config.feature_dim);
    for (int i = 0; i < config.feature_dim; ++i)
      ref.vector[i] = static_cast<float>(v[i] / norm);
    refs.push_back(std::move(ref));
  }
  return refs;
}

ReferenceFeature reference_feature(Category c, const RenderConfig& config) {
  return reference_features(config)[static_cast<int>(c)];
}

namespace {

struct Sample {
  Point3 p;
  int object_id;
  Category category;
};

void sample_cylinder(Rng& rng, const Point3& base_center, double radius, double height,
                     int count, double side_fraction, std::vector<Point3>& out) {
  for (int i = 0; i < count; ++i) {
    const double theta = rng.uniform(0.0, 2.0 * M_PI);
    if (rng.uniform() < side_fraction) {
      out.push_back({base_center.x + radius * std::cos(theta),
                     base_center.y + radius * std::sin(theta),
                     base_center.z + rng.uniform(0.0, height)});
    } else {
      const double r = radius * std::sqrt(rng.uniform());
      out.push_back({base_center.x + r * std::cos(theta),
                     base_center.y + r * std::sin(theta), base_center.z + height});
    }
  }
}

void sample_disk(Rng& rng, const Point3& center, double radius, int count,
                 std::vector<Point3>& out) {
  for (int i = 0; i < count; ++i) {
    const double theta = rng.uniform(0.0, 2.0 * M_PI);
    const double r = radius * std::sqrt(rng.uniform());
    out.push_back({center.x + r * std::cos(theta), center.y + r * std::sin(theta), center.z});
  }
}

}  // namespace

void sample_object_surface(Rng& rng, const SceneObject& obj, const Scene& scene, int count,
                           geom::PointSet& out) {
  namespace ly = layout;
  switch (obj.category) {
    case Category::battery: {
      const Point3 base{obj.position.x, obj.position.y, obj.position.z - ly::kBatteryHeight / 2};
      sample_cylinder(rng, base, ly::kBatteryRadius, ly::kBatteryHeight, count, 0.85, out);
      break;
    }
    case Category::slot:
      sample_disk(rng, {obj.position.x, obj.position.y, ly::kSlotDiskZ}, ly::kSlotDiskRadius,
                  count, out);
      break;
    case Category::mug: {
      const Point3 base{obj.position.x, obj.position.y, obj.position.z - ly::kMugHeight / 2};
      const int body = count * 4 / 5;
      sample_cylinder(rng, base, ly::kMugBodyRadius, ly::kMugHeight, body, 0.9, out);
      // handle: radial stub at mid height; yaw 0 points toward the robot (-y)
      const double hx = std::sin(obj.yaw), hy = -std::cos(obj.yaw);
      for (int i = body; i < count; ++i) {
        const double r = rng.uniform(ly::kMugBodyRadius, ly::kMugBodyRadius + ly::kMugHandleLength);
        out.push_back({obj.position.x + hx * r, obj.position.y + hy * r,
                       obj.position.z + rng.uniform(-0.01, 0.01)});
      }
      break;
    }
    case Category::branch: {
      const auto trunk = scene.object(scene.ids_of(Category::tree).at(0)).position;
      double dx = obj.position.x - trunk.x, dy = obj.position.y - trunk.y;
      const double len = std::hypot(dx, dy);
      dx /= len;
      dy /= len;
      for (int i = 0; i < count; ++i) {
        const double r = rng.uniform(ly::kBranchInnerRadius, ly::kBranchOuterRadius);
        const double jitter = 0.004;
        out.push_back({trunk.x + dx * r + rng.uniform(-jitter, jitter),
                       trunk.y + dy * r + rng.uniform(-jitter, jitter),
                       obj.position.z + rng.uniform(-jitter, jitter)});
      }
      break;
    }
    case Category::crate: {
      // four wall faces plus a plug disk for every occupied slot
      const double hx = ly::kCrateWallHalfX, hy = ly::kCrateWallHalfY;
      const int plugs = static_cast<int>(scene.slot_grid.occupied.size());
      const int wall_count = count;
      for (int i = 0; i < wall_count; ++i) {
        const double t = rng.uniform(-1.0, 1.0);
        const double z = obj.position.z + rng.uniform(0.0, ly::kCrateWallHeight);
        switch (static_cast<int>(rng.uniform_int(0, 3))) {
          case 0: out.push_back({obj.position.x + t * hx, obj.position.y - hy, z}); break;
          case 1: out.push_back({obj.position.x + t * hx, obj.position.y + hy, z}); break;
          case 2: out.push_back({obj.position.x - hx, obj.position.y + t * hy, z}); break;
          default: out.push_back({obj.position.x + hx, obj.position.y + t * hy, z}); break;
        }
      }
      for (int p = 0; p < plugs; ++p) {
        const int index = scene.slot_grid.occupied[p];
        const int r = index / scene.slot_grid.cols, c = index % scene.slot_grid.cols;
        const Point3 center{obj.position.x + (c - 1.5) * ly::kSlotPitch,
                            obj.position.y + (r - 1.0) * ly::kSlotPitch, 0.03};
        sample_disk(rng, center, 0.018, count / 3, out);
      }
      break;
    }
    case Category::tree: {
      const Point3 base{obj.position.x, obj.position.y, 0.0};
      sample_cylinder(rng, base, ly::kTrunkRadius, ly::kBranchZ[3] + 0.03, count, 1.0, out);
      break;
    }
    case Category::pad: {
      const double hx = 0.3, hy = (ly::kPadMaxY - ly::kPadMinY) / 2;
      for (int i = 0; i < count; ++i)
        out.push_back({obj.position.x + rng.uniform(-hx, hx),
                       obj.position.y + rng.uniform(-hy, hy), ly::kPadZ});
      break;
    }
  }
}

FeatureCloud render_feature_cloud(const Scene& scene, double noise_sigma,
                                  std::uint64_t seed, const RenderConfig& config) {
  if (noise_sigma < 0.0) throw Error("render_feature_cloud: negative noise");
  const auto refs = reference_features(config);
  Rng master(seed ^ 0x9fd3a1c7ULL);

  std::vector<Sample> samples;
  std::vector<Point3> buffer;
  for (std::size_t oi = 0; oi < scene.objects.size(); ++oi) {
    const auto& obj = scene.objects[oi];
    Rng rng = master.fork(oi);
    buffer.clear();
    sample_object_surface(rng, obj, scene, config.samples_per_object, buffer);
    for (const auto& p : buffer) samples.push_back({p, obj.id, obj.category});
  }

  std::vector<std::size_t> keep(samples.size());
  for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = i;
  if (samples.size() > static_cast<std::size_t>(config.max_points)) {
    geom::PointSet all;
    all.reserve(samples.size());
    for (const auto& s : samples) all.push_back(s.p);
    keep = geom::fps_downsample(all, config.max_points, 0);
    std::sort(keep.begin(), keep.end());
  }

  FeatureCloud cloud;
  cloud.feature_dim = config.feature_dim;
  cloud.points.reserve(keep.size());
  cloud.features.reserve(keep.size() * config.feature_dim);
  Rng noise = master.fork(0xc0ffee);
  // sigma parameterizes the expected norm of the whole perturbation vector,
  // so similarity degradation is independent of the feature dimension
  const double sigma_dim = noise_sigma / std::sqrt(static_cast<double>(config.feature_dim));
  for (const auto idx : keep) {
    const auto& s = samples[idx];
    cloud.points.push_back(s.p);
    cloud.gt_instance.push_back(s.object_id);
    cloud.gt_category.push_back(s.category);
    const auto& ref = refs[static_cast<int>(s.category)].vector;
    std::vector<double> f(config.feature_dim);
    double norm2 = 0.0;
    for (int d = 0; d < config.feature_dim; ++d) {
      f[d] = ref[d] + (noise_sigma > 0.0 ? sigma_dim * noise.normal() : 0.0);
      norm2 += f[d] * f[d];
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (int d = 0; d < config.feature_dim; ++d)
      cloud.features.push_back(static_cast<float>(f[d] * inv));
  }
  return cloud;
}

namespace {

template <typename T>
void write_raw(std::FILE* f, const T* data, std::size_t n) {
  if (std::fwrite(data, sizeof(T), n, f) != n) throw Error("short write");
}

template <typename T>
void read_raw(std::FILE* f, T* data, std::size_t n) {
  if (std::fread(data, sizeof(T), n, f) != n) throw Error("short read");
}

struct FileCloser {
  std::FILE* f;
  ~FileCloser() {
    if (f) std::fclose(f);
  }
};

}  // namespace

void write_fcd(const std::string& path, const FeatureCloud& cloud) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw Error("cannot open " + path);
  FileCloser closer{f};
  write_raw(f, "FCD1", 4);
  const std::uint32_t m = static_cast<std::uint32_t>(cloud.size());
  const std::uint32_t dim = static_cast<std::uint32_t>(cloud.feature_dim);
  write_raw(f, &m, 1);
  write_raw(f, &dim, 1);
  std::vector<float> pos;
  pos.reserve(3 * m);
  for (const auto& p : cloud.points) {
    pos.push_back(static_cast<float>(p.x));
    pos.push_back(static_cast<float>(p.y));
    pos.push_back(static_cast<float>(p.z));
  }
  write_raw(f, pos.data(), pos.size());
  write_raw(f, cloud.features.data(), cloud.features.size());
  write_raw(f, cloud.gt_instance.data(), cloud.gt_instance.size());
  std::vector<std::uint8_t> cats;
  cats.reserve(m);
  for (auto c : cloud.gt_category) cats.push_back(static_cast<std::uint8_t>(c));
  write_raw(f, cats.data(), cats.size());
}

FeatureCloud read_fcd(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw Error("cannot open " + path);
  FileCloser closer{f};
  char magic[4];
  read_raw(f, magic, 4);
  if (std::memcmp(magic, "FCD1", 4) != 0) throw Error("not an FCD1 file");
  std::uint32_t m = 0, dim = 0;
  read_raw(f, &m, 1);
  read_raw(f, &dim, 1);
  FeatureCloud cloud;
  cloud.feature_dim = static_cast<int>(dim);
  std::vector<float> pos(3 * static_cast<std::size_t>(m));
  read_raw(f, pos.data(), pos.size());
  cloud.points.resize(m);
  for (std::uint32_t i = 0; i < m; ++i)
    cloud.points[i] = {pos[3 * i], pos[3 * i + 1], pos[3 * i + 2]};
  cloud.features.resize(static_cast<std::size_t>(m) * dim);
  read_raw(f, cloud.features.data(), cloud.features.size());
  cloud.gt_instance.resize(m);
  read_raw(f, cloud.gt_instance.data(), m);
  std::vector<std::uint8_t> cats(m);
  read_raw(f, cats.data(), m);
  cloud.gt_category.resize(m);
  for (std::uint32_t i = 0; i < m; ++i) cloud.gt_category[i] = static_cast<Category>(cats[i]);
  return cloud;
}

}  // namespace ambench::sim
