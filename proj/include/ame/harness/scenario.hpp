#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ame/sim/world.hpp"

namespace ame::harness {

enum class WaypointKind { Via, Dwell, Goal };

struct Waypoint {
  sim::Vec2 target;
  WaypointKind kind = WaypointKind::Via;
  int working_area = -1;          ///< index into World::working_areas for Via/Dwell legs
  std::optional<double> facing;   ///< heading to hold once arrived (Dwell only)
  bool reverse = false;           ///< drive this leg backwards

  friend bool operator==(const Waypoint&, const Waypoint&) = default;
};

/// Route: for each working area in order, a staging point `staging_distance`
/// out from the nearest obstacle face, then the area center; the goal center last.
/// Forward areas are approached facing the obstacle, reverse areas backing into it.
[[nodiscard]] std::vector<Waypoint> plan_route(const sim::World& world, double staging_distance = 1.0);

struct Scenario {
  std::string name;
  sim::World world;
  std::vector<Waypoint> route;

  /// Throws std::invalid_argument when the route skips a working area, visits
  /// them out of order, or does not end at the goal.
  void validate() const;
};

[[nodiscard]] Scenario make_scenario(sim::World world, double staging_distance = 1.0);
[[nodiscard]] Scenario load_scenario(const std::filesystem::path& world_file);

/// The seven corridor scenarios, in order, from `worlds_dir`.
[[nodiscard]] std::vector<std::filesystem::path> shipped_scenario_files(const std::filesystem::path& worlds_dir);

}  // namespace ame::harness
