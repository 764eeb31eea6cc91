#include "ambench/geom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "ambench/error.hpp"

namespace ambench::geom {

double squared_distance(const Point3& a, const Point3& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return dx * dx + dy * dy + dz * dz;
}

double distance(const Point3& a, const Point3& b) {
  return std::sqrt(squared_distance(a, b));
}

double Mat3::orthonormality_defect() const {
  double worst = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double dot = 0.0;
      for (int k = 0; k < 3; ++k) dot += m[k * 3 + i] * m[k * 3 + j];
      worst = std::max(worst, std::fabs(dot - (i == j ? 1.0 : 0.0)));
    }
  }
  return worst;
}

void Camera::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw Error("camera: fx, fy must be positive");
  if (width <= 0 || height <= 0) throw Error("camera: empty image plane");
  if (cx < 0.0 || cx >= width || cy < 0.0 || cy >= height)
    throw Error("camera: principal point outside image");
  if (rotation.orthonormality_defect() > 1e-9)
    throw Error("camera: rotation is not orthonormal");
}

Camera Camera::look_at(const Point3& eye, const Point3& target, double fx,
                       double fy, int width, int height) {
  auto norm = [](const Point3& p) {
    const double n = std::sqrt(p.x * p.x + p.y * p.y + p.z * p.z);
    return Point3{p.x / n, p.y / n, p.z / n};
  };
  auto cross = [](const Point3& a, const Point3& b) {
    return Point3{a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z,
                  a.x * b.y - a.y * b.x};
  };
  const Point3 forward = norm(target - eye);
  Point3 up{0, 0, 1};
  if (std::fabs(forward.z) > 0.999) up = {0, 1, 0};
  const Point3 right = norm(cross(forward, up));
  const Point3 down = cross(forward, right);

  Camera cam;
  cam.fx = fx;
  cam.fy = fy;
  cam.cx = (width - 1) / 2.0;
  cam.cy = (height - 1) / 2.0;
  cam.width = width;
  cam.height = height;
  cam.rotation.m = {right.x,   right.y,   right.z,
                    down.x,    down.y,    down.z,
                    forward.x, forward.y, forward.z};
  // t = -R * eye so that x_cam = R * x_world + t
  const Point3 t = cam.rotation.apply(eye) * -1.0;
  cam.translation = t;
  cam.validate();
  return cam;
}

std::size_t Mask2D::count() const {
  std::size_t n = 0;
  for (auto v : values) n += v ? 1 : 0;
  return n;
}

int cluster_count(const ClusterLabels& labels) {
  int top = -1;
  for (int l : labels) top = std::max(top, l);
  return top + 1;
}

std::vector<std::size_t> fps_downsample(const PointSet& cloud, std::size_t k,
                                        std::size_t start) {
  const std::size_t m = cloud.size();
  if (m == 0) return {};
  if (start >= m) throw Error("fps_downsample: start index out of range");

  std::vector<std::size_t> selected;
  selected.reserve(std::min(k, m));
  if (k == 0) return selected;

  std::vector<double> min_d2(m, std::numeric_limits<double>::infinity());
  std::size_t current = start;
  selected.push_back(current);
  while (selected.size() < std::min(k, m)) {
    std::size_t best = m;
    double best_d2 = -1.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double d2 = squared_distance(cloud[i], cloud[current]);
      if (d2 < min_d2[i]) min_d2[i] = d2;
      if (min_d2[i] > best_d2 && min_d2[i] > 0.0) {
        // min_d2 of already-selected points is 0, so they never win
        best_d2 = min_d2[i];
        best = i;
      }
    }
    if (best == m) {
      // all remaining points coincide with selected ones; take lowest unselected
      std::vector<bool> used(m, false);
      for (auto s : selected) used[s] = true;
      for (std::size_t i = 0; i < m && selected.size() < std::min(k, m); ++i)
        if (!used[i]) selected.push_back(i);
      return selected;
    }
    selected.push_back(best);
    current = best;
  }
  return selected;
}

ClusterLabels dbscan(const PointSet& cloud, double eps, std::size_t min_pts) {
  if (!(eps > 0.0)) throw Error("dbscan: eps must be positive");
  if (min_pts < 1) throw Error("dbscan: min_pts must be >= 1");

  const std::size_t m = cloud.size();
  const double eps2 = eps * eps;
  ClusterLabels labels(m, -2);  // -2 = unvisited, -1 = noise

  auto neighbors = [&](std::size_t i, std::vector<std::size_t>& out) {
    out.clear();
    for (std::size_t j = 0; j < m; ++j)
      if (squared_distance(cloud[i], cloud[j]) <= eps2) out.push_back(j);
  };

  std::vector<std::size_t> nbr, expand_nbr;
  int next_cluster = 0;
  for (std::size_t i = 0; i < m; ++i) {
    if (labels[i] != -2) continue;
    neighbors(i, nbr);
    if (nbr.size() < min_pts) {
      labels[i] = -1;
      continue;
    }
    const int cluster = next_cluster++;
    labels[i] = cluster;
    std::queue<std::size_t> frontier;
    for (auto j : nbr) frontier.push(j);
    while (!frontier.empty()) {
      const std::size_t q = frontier.front();
      frontier.pop();
      if (labels[q] == -1) labels[q] = cluster;  // border point
      if (labels[q] != -2) continue;
      labels[q] = cluster;
      neighbors(q, expand_nbr);
      if (expand_nbr.size() >= min_pts)
        for (auto j : expand_nbr) frontier.push(j);
    }
  }
  return labels;
}

double chamfer_distance(const PointSet& a, const PointSet& b,
                        ChamferVariant variant) {
  if (a.empty() || b.empty()) throw Error("empty point set");

  auto one_way = [variant](const PointSet& from, const PointSet& to) {
    double sum = 0.0;
    for (const auto& p : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : to) best = std::min(best, squared_distance(p, q));
      sum += variant == ChamferVariant::squared ? best : std::sqrt(best);
    }
    return sum / static_cast<double>(from.size());
  };
  return one_way(a, b) + one_way(b, a);
}

std::vector<Projection> project(const PointSet& points, const Camera& cam) {
  std::vector<Projection> out;
  out.reserve(points.size());
  for (const auto& p : points) {
    const Point3 c = cam.rotation.apply(p) + cam.translation;
    Projection proj;
    if (c.z > 0.0) {
      proj.u = cam.fx * c.x / c.z + cam.cx;
      proj.v = cam.fy * c.y / c.z + cam.cy;
      proj.depth = c.z;
      proj.visible = proj.u >= -0.5 && proj.u < cam.width - 0.5 &&
                     proj.v >= -0.5 && proj.v < cam.height - 0.5;
    }
    out.push_back(proj);
  }
  return out;
}

PointSet back_project(const DepthImage& image, const Camera& cam) {
  PointSet out;
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const double d = image.depth[static_cast<std::size_t>(y) * image.width + x];
      if (d <= 0.0) continue;
      const Point3 c{(x - cam.cx) / cam.fx * d, (y - cam.cy) / cam.fy * d, d};
      out.push_back(cam.rotation.apply_transposed(c - cam.translation));
    }
  }
  return out;
}

Mask2D dilate_mask(const Mask2D& mask, int radius) {
  if (radius < 0) throw Error("dilate_mask: radius must be >= 0");
  if (radius == 0) return mask;
  Mask2D out(mask.width, mask.height);
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (!mask.at(x, y)) continue;
      const int x0 = std::max(0, x - radius), x1 = std::min(mask.width - 1, x + radius);
      const int y0 = std::max(0, y - radius), y1 = std::min(mask.height - 1, y + radius);
      for (int yy = y0; yy <= y1; ++yy)
        for (int xx = x0; xx <= x1; ++xx) out.set(xx, yy, 1);
    }
  }
  return out;
}

}  // namespace ambench::geom
