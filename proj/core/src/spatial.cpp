#include "ambench/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ambench/error.hpp"

namespace ambench::spatial {

using geom::Point3;

const char* to_string(Relation r) {
  switch (r) {
    case Relation::leftmost: return "leftmost";
    case Relation::rightmost: return "rightmost";
    case Relation::frontmost: return "frontmost";
    case Relation::backmost: return "backmost";
    case Relation::nearest: return "nearest";
    case Relation::furthest: return "furthest";
    case Relation::row_front: return "row-front";
    case Relation::row_middle: return "row-middle";
    case Relation::row_back: return "row-back";
    case Relation::col_left: return "col-left";
    case Relation::col_middle: return "col-middle";
    case Relation::col_right: return "col-right";
    case Relation::topmost_left: return "topmost-left";
    case Relation::topmost_right: return "topmost-right";
    case Relation::middle_right: return "middle-right";
    case Relation::any: return "any";
  }
  return "any";
}

namespace {

double horizontal_range(const Point3& p) { return std::hypot(p.x, p.y); }

// Lower score wins; first occurrence breaks ties.
std::vector<double> scores(const std::vector<Point3>& pos, Relation rel) {
  std::vector<double> s(pos.size());
  auto minmax_of = [&](auto&& get) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& p : pos) {
      lo = std::min(lo, get(p));
      hi = std::max(hi, get(p));
    }
    return std::pair{lo, hi};
  };
  switch (rel) {
    case Relation::leftmost:
    case Relation::col_left:
      for (std::size_t i = 0; i < pos.size(); ++i) s[i] = pos[i].x;
      break;
    case Relation::rightmost:
    case Relation::col_right:
      for (std::size_t i = 0; i < pos.size(); ++i) s[i] = -pos[i].x;
      break;
    case Relation::frontmost:
    case Relation::row_front:
      for (std::size_t i = 0; i < pos.size(); ++i) s[i] = pos[i].y;
      break;
    case Relation::backmost:
    case Relation::row_back:
      for (std::size_t i = 0; i < pos.size(); ++i) s[i] = -pos[i].y;
      break;
    case Relation::nearest:
      for (std::size_t i = 0; i < pos.size(); ++i) s[i] = horizontal_range(pos[i]);
      break;
    case Relation::furthest:
      for (std::size_t i = 0; i < pos.size(); ++i) s[i] = -horizontal_range(pos[i]);
      break;
    case Relation::row_middle: {
      const auto [lo, hi] = minmax_of([](const Point3& p) { return p.y; });
      const double mid = (lo + hi) / 2;
      for (std::size_t i = 0; i < pos.size(); ++i) s[i] = std::fabs(pos[i].y - mid);
      break;
    }
    case Relation::col_middle: {
      const auto [lo, hi] = minmax_of([](const Point3& p) { return p.x; });
      const double mid = (lo + hi) / 2;
      for (std::size_t i = 0; i < pos.size(); ++i) s[i] = std::fabs(pos[i].x - mid);
      break;
    }
    default:
      throw Error("scores: relation needs side filtering");
  }
  return s;
}

std::size_t argmin_first(const std::vector<double>& s) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < s.size(); ++i)
    if (s[i] < s[best]) best = i;
  return best;
}

// Indices on one side of the x midpoint; falls back to all when degenerate.
std::vector<std::size_t> side_indices(const std::vector<Point3>& pos, bool right) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& p : pos) {
    lo = std::min(lo, p.x);
    hi = std::max(hi, p.x);
  }
  const double mid = (lo + hi) / 2;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < pos.size(); ++i)
    if (right ? pos[i].x > mid : pos[i].x < mid) out.push_back(i);
  if (out.empty())
    for (std::size_t i = 0; i < pos.size(); ++i) out.push_back(i);
  return out;
}

}  // namespace

std::size_t select(const std::vector<Point3>& positions, Relation relation) {
  if (positions.empty()) throw Error("empty instance list", FailStage::perception);
  switch (relation) {
    case Relation::topmost_left:
    case Relation::topmost_right: {
      const auto side = side_indices(positions, relation == Relation::topmost_right);
      std::size_t best = side[0];
      for (auto i : side)
        if (positions[i].z > positions[best].z) best = i;
      return best;
    }
    case Relation::middle_right: {
      auto side = side_indices(positions, true);
      std::stable_sort(side.begin(), side.end(), [&](std::size_t a, std::size_t b) {
        return positions[a].z > positions[b].z;
      });
      return side[side.size() > 1 ? 1 : 0];
    }
    case Relation::any:
      throw Error("select: 'any' needs a seeded choice");
    default:
      return argmin_first(scores(positions, relation));
  }
}

double select_margin(const std::vector<Point3>& positions, Relation relation) {
  if (positions.empty()) throw Error("empty instance list", FailStage::perception);
  if (positions.size() == 1) return std::numeric_limits<double>::infinity();
  switch (relation) {
    case Relation::topmost_left:
    case Relation::topmost_right:
    case Relation::middle_right: {
      // fixed tree geometry keeps these far apart; margin by z gap
      const auto side = side_indices(positions, relation != Relation::topmost_left);
      if (side.size() < 2) return std::numeric_limits<double>::infinity();
      std::vector<double> zs;
      for (auto i : side) zs.push_back(positions[i].z);
      std::sort(zs.begin(), zs.end());
      return zs[zs.size() - 1] - zs[zs.size() - 2];
    }
    case Relation::any:
      return std::numeric_limits<double>::infinity();
    default: {
      auto s = scores(positions, relation);
      std::sort(s.begin(), s.end());
      return s[1] - s[0];
    }
  }
}

}  // namespace ambench::spatial
