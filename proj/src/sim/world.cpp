#include "ame/sim/world.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ame::sim {

double normalize_angle(double angle) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double wrapped = std::fmod(angle, kTwoPi);
  if (wrapped <= -std::numbers::pi) {
    wrapped += kTwoPi;
  } else if (wrapped > std::numbers::pi) {
    wrapped -= kTwoPi;
  }
  return wrapped;
}

void World::validate() const {
  if (!(bounds.width() > 0.0 && bounds.height() > 0.0)) {
    throw std::invalid_argument("world: bounds must have positive extent");
  }
  for (const auto& box : obstacles) {
    if (!(box.footprint.width() > 0.0 && box.footprint.height() > 0.0 && box.height > 0.0)) {
      throw std::invalid_argument("world: obstacle " + std::to_string(box.id) + " must have positive extent on all axes");
    }
  }
  for (std::size_t k = 0; k < working_areas.size(); ++k) {
    const auto& wa = working_areas[k];
    if (!(wa.area.width() > 0.0 && wa.area.height() > 0.0)) {
      throw std::invalid_argument("world: working area " + std::to_string(k) + " must have positive extent");
    }
    if (!bounds.contains(wa.area)) {
      throw std::invalid_argument("world: working area " + std::to_string(k) + " lies outside bounds");
    }
    if (!(wa.dwell_seconds >= 0.0)) {
      throw std::invalid_argument("world: working area " + std::to_string(k) + " dwell must be >= 0");
    }
  }
  if (!(goal.width() > 0.0 && goal.height() > 0.0) || !bounds.contains(goal)) {
    throw std::invalid_argument("world: goal region must have positive extent and lie within bounds");
  }
  if (!(start_pose.footprint_radius > 0.0)) {
    throw std::invalid_argument("world: footprint_radius must be > 0");
  }
  if (!(start_pose.body_height > 0.0)) {
    throw std::invalid_argument("world: body_height must be > 0");
  }
  if (!bounds.contains(start_pose.x, start_pose.y)) {
    throw std::invalid_argument("world: start pose lies outside bounds");
  }
}

}  // namespace ame::sim
