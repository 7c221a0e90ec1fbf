#pragma once

#include <string>
#include <vector>

#include "ame/common/image.hpp"

namespace ame::sim {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Vec2&, const Vec2&) = default;
};

/// Axis-aligned rectangle in world meters.
struct Rect {
  double min_x = 0.0;
  double min_y = 0.0;
  double max_x = 0.0;
  double max_y = 0.0;

  [[nodiscard]] double width() const { return max_x - min_x; }
  [[nodiscard]] double height() const { return max_y - min_y; }
  [[nodiscard]] Vec2 center() const { return {0.5 * (min_x + max_x), 0.5 * (min_y + max_y)}; }
  [[nodiscard]] bool contains(double x, double y) const {
    return x >= min_x && x <= max_x && y >= min_y && y <= max_y;
  }
  [[nodiscard]] bool contains(const Rect& other) const {
    return other.min_x >= min_x && other.max_x <= max_x && other.min_y >= min_y && other.max_y <= max_y;
  }

  friend bool operator==(const Rect&, const Rect&) = default;
};

/// Obstacle: a box standing on the floor, `height` meters tall.
struct Box {
  int id = 0;
  Rect footprint;
  double height = 1.0;
  Rgb color{200, 60, 60};

  friend bool operator==(const Box&, const Box&) = default;
};

/// Which way the operator faces while dwelling in a working area.
enum class Approach { Forward, Reverse };

struct WorkingArea {
  Rect area;
  double dwell_seconds = 15.0;
  Approach approach = Approach::Forward;

  friend bool operator==(const WorkingArea&, const WorkingArea&) = default;
};

struct RobotState {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;  ///< heading, normalized to (-pi, pi]
  double v = 0.0;      ///< forward speed [m/s]
  double omega = 0.0;  ///< yaw rate [rad/s]
  double footprint_radius = 0.25;
  double body_height = 1.2;

  [[nodiscard]] Vec2 position() const { return {x, y}; }

  friend bool operator==(const RobotState&, const RobotState&) = default;
};

struct World {
  std::string name;
  std::vector<Box> obstacles;
  Rgb floor_color{110, 110, 110};
  Rect bounds;
  std::vector<WorkingArea> working_areas;
  Rect goal;
  RobotState start_pose;

  /// Throws std::invalid_argument naming the first violated invariant.
  void validate() const;

  friend bool operator==(const World&, const World&) = default;
};

/// Wraps an angle into (-pi, pi].
[[nodiscard]] double normalize_angle(double angle);

}  // namespace ame::sim
