#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace ambench::geom {

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Point3 operator+(const Point3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Point3 operator-(const Point3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Point3 operator*(double s) const { return {x * s, y * s, z * s}; }
};

/// Point order is stable; indices identify points across the pipeline.
using PointSet = std::vector<Point3>;

double squared_distance(const Point3& a, const Point3& b);
double distance(const Point3& a, const Point3& b);

/// Row-major 3x3 matrix, enough rotation support for the camera rig.
struct Mat3 {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  Point3 apply(const Point3& p) const {
    return {m[0] * p.x + m[1] * p.y + m[2] * p.z,
            m[3] * p.x + m[4] * p.y + m[5] * p.z,
            m[6] * p.x + m[7] * p.y + m[8] * p.z};
  }
  Point3 apply_transposed(const Point3& p) const {
    return {m[0] * p.x + m[3] * p.y + m[6] * p.z,
            m[1] * p.x + m[4] * p.y + m[7] * p.z,
            m[2] * p.x + m[5] * p.y + m[8] * p.z};
  }
  /// max |R^T R - I|, used to validate camera extrinsics.
  double orthonormality_defect() const;
};

/// Pinhole camera; extrinsics map world coordinates into the camera frame.
struct Camera {
  double fx = 0.0, fy = 0.0;
  double cx = 0.0, cy = 0.0;
  Mat3 rotation;        // world -> camera
  Point3 translation;   // world -> camera
  int width = 0, height = 0;

  /// Throws ambench::Error if intrinsics or extrinsics are out of contract.
  void validate() const;

  /// Camera at `eye` looking toward `target`, +z forward, y down-ish.
  static Camera look_at(const Point3& eye, const Point3& target, double fx,
                        double fy, int width, int height);
};

struct Mask2D {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> values;  // row-major, 0/1

  Mask2D() = default;
  Mask2D(int w, int h) : width(w), height(h), values(static_cast<std::size_t>(w) * h, 0) {}

  std::uint8_t at(int x, int y) const {
    return values[static_cast<std::size_t>(y) * width + x];
  }
  void set(int x, int y, std::uint8_t v) {
    values[static_cast<std::size_t>(y) * width + x] = v;
  }
  std::size_t count() const;
};

/// -1 marks noise; cluster ids of non-noise points are contiguous from 0.
using ClusterLabels = std::vector<int>;
int cluster_count(const ClusterLabels& labels);

struct DepthImage {
  int width = 0;
  int height = 0;
  std::vector<double> depth;  // row-major meters; 0 = no return

  DepthImage() = default;
  DepthImage(int w, int h) : width(w), height(h), depth(static_cast<std::size_t>(w) * h, 0.0) {}
};

struct Projection {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;
  bool visible = false;
};

/// Farthest point sampling. Starts from `start`, greedily adds the point
/// maximizing the minimum distance to the selected set; ties go to the
/// lowest index. Returns selection order; k >= M returns all indices.
std::vector<std::size_t> fps_downsample(const PointSet& cloud, std::size_t k,
                                        std::size_t start = 0);

/// Classic DBSCAN over Euclidean distance (<= eps neighborhoods, the point
/// itself counts toward min_pts). With min_pts = 1 this is exactly the
/// connected components of the eps-neighborhood graph.
ClusterLabels dbscan(const PointSet& cloud, double eps, std::size_t min_pts);

enum class ChamferVariant { squared, unsquared };

/// Symmetric Chamfer distance: mean (squared) nearest-neighbor distance
/// from a to b plus the same from b to a. Throws on empty input.
double chamfer_distance(const PointSet& a, const PointSet& b,
                        ChamferVariant variant = ChamferVariant::squared);

std::vector<Projection> project(const PointSet& points, const Camera& cam);

/// One world-space point per pixel with depth > 0; inverse of project on
/// pixel centers.
PointSet back_project(const DepthImage& image, const Camera& cam);

/// Morphological dilation with a square structuring element of the given
/// Chebyshev radius.
Mask2D dilate_mask(const Mask2D& mask, int radius);

}  // namespace ambench::geom
