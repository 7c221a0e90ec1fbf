#include "ame/sim/obstacles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ame::sim {

Vec2 closest_boundary_point(const Rect& rect, Vec2 p) {
  const bool inside = p.x > rect.min_x && p.x < rect.max_x && p.y > rect.min_y && p.y < rect.max_y;
  if (!inside) {
    return {std::clamp(p.x, rect.min_x, rect.max_x), std::clamp(p.y, rect.min_y, rect.max_y)};
  }
  const double to_left = p.x - rect.min_x;
  const double to_right = rect.max_x - p.x;
  const double to_bottom = p.y - rect.min_y;
  const double to_top = rect.max_y - p.y;
  const double nearest = std::min({to_left, to_right, to_bottom, to_top});
  if (nearest == to_left) return {rect.min_x, p.y};
  if (nearest == to_right) return {rect.max_x, p.y};
  if (nearest == to_bottom) return {p.x, rect.min_y};
  return {p.x, rect.max_y};
}

double distance_to_rect(const Rect& rect, Vec2 p) {
  const double dx = std::max({rect.min_x - p.x, 0.0, p.x - rect.max_x});
  const double dy = std::max({rect.min_y - p.y, 0.0, p.y - rect.max_y});
  return std::hypot(dx, dy);
}

std::vector<ObstacleObservation> observe_obstacles(const World& world, const RobotState& state,
                                                   const RobotState& prev_state, double dt, double sensing_radius) {
  if (!(dt > 0.0)) {
    throw std::invalid_argument("observe_obstacles: dt must be > 0");
  }
  std::vector<ObstacleObservation> out;
  for (const auto& box : world.obstacles) {
    const double surface = distance_to_rect(box.footprint, state.position()) - state.footprint_radius;
    if (surface > sensing_radius) {
      continue;
    }
    const double distance = std::max(surface, kMinObstacleDistance);
    const double prev_distance =
        std::max(distance_to_rect(box.footprint, prev_state.position()) - prev_state.footprint_radius,
                 kMinObstacleDistance);
    const Vec2 nearest = closest_boundary_point(box.footprint, state.position());
    out.push_back({box.id, distance, std::max(0.0, (prev_distance - distance) / dt), nearest.x, nearest.y});
  }
  return out;
}

bool check_collision(const World& world, const RobotState& state) {
  const double r = state.footprint_radius;
  const auto& b = world.bounds;
  if (state.x - r < b.min_x || state.x + r > b.max_x || state.y - r < b.min_y || state.y + r > b.max_y) {
    return true;
  }
  return std::any_of(world.obstacles.begin(), world.obstacles.end(), [&](const Box& box) {
    return distance_to_rect(box.footprint, state.position()) <= r;
  });
}

}  // namespace ame::sim
