#pragma once

#include <cmath>
#include <vector>

namespace triad {

/// Point in the cell frame, meters. z is height above ground.
struct Position {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Position&, const Position&) = default;
};

inline double horizontal_distance(const Position& a, const Position& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

inline double distance(const Position& a, const Position& b) {
  return std::hypot(a.x - b.x, a.y - b.y, a.z - b.z);
}

/// One sampled cell: UEs and tags on the ground, the UAV hovering over the center.
struct Deployment {
  std::vector<Position> ue_positions;
  std::vector<Position> tag_positions;
  Position uav_position;

  friend bool operator==(const Deployment&, const Deployment&) = default;
};

} // namespace triad
