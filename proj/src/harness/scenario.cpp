#include "ame/harness/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "ame/sim/obstacles.hpp"
#include "ame/sim/world_io.hpp"

namespace ame::harness {

namespace {

constexpr double kStagingMargin = 0.5;
constexpr int kShippedScenarioCount = 7;

}  // namespace

std::vector<Waypoint> plan_route(const sim::World& world, double staging_distance) {
  if (!(staging_distance >= 0.0)) {
    throw std::invalid_argument("plan_route: staging distance must be >= 0");
  }
  std::vector<Waypoint> route;
  for (std::size_t k = 0; k < world.working_areas.size(); ++k) {
    const auto& wa = world.working_areas[k];
    const sim::Vec2 center = wa.area.center();
    const bool reverse = wa.approach == sim::Approach::Reverse;
    const int index = static_cast<int>(k);

    const sim::Box* nearest = nullptr;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& box : world.obstacles) {
      const double d = sim::distance_to_rect(box.footprint, center);
      if (d < best) {
        best = d;
        nearest = &box;
      }
    }
    if (nearest == nullptr) {
      route.push_back({center, WaypointKind::Dwell, index, std::nullopt, reverse});
      continue;
    }
    if (!(best > 0.0)) {
      throw std::invalid_argument("plan_route: working area " + std::to_string(k) + " center lies inside an obstacle");
    }
    const sim::Vec2 face = sim::closest_boundary_point(nearest->footprint, center);
    const double nx = (center.x - face.x) / best;
    const double ny = (center.y - face.y) / best;
    const double toward_obstacle = std::atan2(-ny, -nx);
    const double facing = reverse ? sim::normalize_angle(toward_obstacle + std::numbers::pi) : toward_obstacle;

    sim::Vec2 staging{center.x + nx * staging_distance, center.y + ny * staging_distance};
    staging.x = std::clamp(staging.x, world.bounds.min_x + kStagingMargin, world.bounds.max_x - kStagingMargin);
    staging.y = std::clamp(staging.y, world.bounds.min_y + kStagingMargin, world.bounds.max_y - kStagingMargin);
    route.push_back({staging, WaypointKind::Via, index, std::nullopt, reverse});
    route.push_back({center, WaypointKind::Dwell, index, facing, reverse});
  }
  route.push_back({world.goal.center(), WaypointKind::Goal, -1, std::nullopt, false});
  return route;
}

void Scenario::validate() const {
  world.validate();
  if (route.empty() || route.back().kind != WaypointKind::Goal) {
    throw std::invalid_argument("scenario: route must end at the goal");
  }
  int next_area = 0;
  for (std::size_t k = 0; k + 1 < route.size(); ++k) {
    const auto& wp = route[k];
    if (wp.kind == WaypointKind::Goal) {
      throw std::invalid_argument("scenario: goal appears before the end of the route");
    }
    if (wp.kind == WaypointKind::Dwell) {
      if (wp.working_area != next_area) {
        throw std::invalid_argument("scenario: route visits working areas out of order");
      }
      ++next_area;
    }
  }
  if (next_area != static_cast<int>(world.working_areas.size())) {
    throw std::invalid_argument("scenario: route does not visit every working area");
  }
}

Scenario make_scenario(sim::World world, double staging_distance) {
  Scenario scenario;
  scenario.name = world.name;
  scenario.route = plan_route(world, staging_distance);
  scenario.world = std::move(world);
  scenario.validate();
  return scenario;
}

Scenario load_scenario(const std::filesystem::path& world_file) { return make_scenario(sim::load_world(world_file)); }

std::vector<std::filesystem::path> shipped_scenario_files(const std::filesystem::path& worlds_dir) {
  std::vector<std::filesystem::path> files;
  for (int k = 1; k <= kShippedScenarioCount; ++k) {
    files.push_back(worlds_dir / ("corridor_" + std::to_string(k) + ".json"));
  }
  return files;
}

}  // namespace ame::harness
