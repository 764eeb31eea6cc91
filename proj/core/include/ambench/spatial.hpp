#pragma once

#include <string>
#include <vector>

#include "ambench/geom.hpp"

namespace ambench::spatial {

/// Spatial selection rules shared by instruction-target extraction (over
/// symbolic object positions) and program execution (over detected instance
/// centroids). Keeping a single implementation makes the two routes agree.
enum class Relation {
  leftmost,
  rightmost,
  frontmost,
  backmost,
  nearest,    // min horizontal distance to the robot base at the origin
  furthest,   // max horizontal distance to the robot base
  row_front,  // min y
  row_middle, // closest to (min y + max y) / 2
  row_back,   // max y
  col_left,   // min x
  col_middle, // closest to (min x + max x) / 2
  col_right,  // max x
  topmost_left,   // highest among x < midpoint
  topmost_right,  // highest among x > midpoint
  middle_right,   // second-highest among x > midpoint
  any,
};

const char* to_string(Relation r);

/// Winner index under the relation; ties resolve to the lowest index.
/// Throws Error("empty instance list") on empty input; Relation::any is the
/// caller's job (it needs a seed).
std::size_t select(const std::vector<geom::Point3>& positions, Relation relation);

/// Gap between winner and runner-up in the relation's score (absolute).
/// Infinity for a single candidate. Only meaningful for argmin/argmax
/// relations; used to reject near-ambiguous scenes.
double select_margin(const std::vector<geom::Point3>& positions, Relation relation);

}  // namespace ambench::spatial
