#pragma once

#include <vector>

#include "ame/sim/world.hpp"

namespace ame::sim {

/// Distance used for an obstacle the footprint already overlaps.
inline constexpr double kMinObstacleDistance = 0.01;
inline constexpr double kDefaultSensingRadius = 5.0;

struct ObstacleObservation {
  int obstacle_id = 0;
  double distance = 0.0;       ///< footprint surface to nearest obstacle point [m]
  double closing_speed = 0.0;  ///< rate of decrease of distance, clamped >= 0 [m/s]
  double x = 0.0;              ///< nearest obstacle point, world frame
  double y = 0.0;

  friend bool operator==(const ObstacleObservation&, const ObstacleObservation&) = default;
};

/// Closest point of the rectangle's boundary to p. For p strictly inside, the
/// projection onto the nearest edge.
[[nodiscard]] Vec2 closest_boundary_point(const Rect& rect, Vec2 p);

/// Euclidean distance from p to the rectangle (0 when inside).
[[nodiscard]] double distance_to_rect(const Rect& rect, Vec2 p);

/// Observations for every obstacle whose surface lies within `sensing_radius`
/// of the footprint. Closing speed is the backward difference against
/// `prev_state`, clamped at zero.
[[nodiscard]] std::vector<ObstacleObservation> observe_obstacles(const World& world, const RobotState& state,
                                                                 const RobotState& prev_state, double dt,
                                                                 double sensing_radius = kDefaultSensingRadius);

/// True iff the footprint disc touches any obstacle (closed condition) or
/// leaves the world bounds.
[[nodiscard]] bool check_collision(const World& world, const RobotState& state);

}  // namespace ame::sim
