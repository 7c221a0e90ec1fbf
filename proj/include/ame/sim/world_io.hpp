#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "ame/sim/world.hpp"

namespace ame::sim {

inline constexpr int kWorldSchemaVersion = 1;

/// World files are JSON:
///
///   {
///     "schema_version": 1,
///     "name": "corridor_a",
///     "bounds": {"min": [0, 0], "max": [22, 6]},
///     "floor_color": [110, 110, 110],
///     "obstacles": [{"min": [3, 4.8], "max": [4.2, 5.8], "height": 0.8, "color": [200, 40, 40]}],
///     "working_areas": [{"min": [3.2, 3.8], "max": [4.0, 4.8], "dwell": 15.0, "approach": "forward"}],
///     "goal": {"min": [20, 2], "max": [21.6, 4]},
///     "start_pose": {"x": 1.2, "y": 1.5, "theta": 0.0, "footprint_radius": 0.25, "body_height": 1.2}
///   }
///
/// Obstacle ids default to their index. `floor_color`, `dwell`, `approach`,
/// `footprint_radius` and `body_height` are optional.
[[nodiscard]] World world_from_json(const nlohmann::json& doc);
[[nodiscard]] nlohmann::json world_to_json(const World& world);

/// Throws std::runtime_error with the path in the message when the file is missing or malformed.
[[nodiscard]] World load_world(const std::filesystem::path& path);
void save_world(const std::filesystem::path& path, const World& world);

/// SHA-256 of the canonical JSON serialization; identifies a world for replay checks.
[[nodiscard]] std::string world_hash(const World& world);

}  // namespace ame::sim
