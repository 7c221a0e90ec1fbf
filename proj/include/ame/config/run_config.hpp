#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ame/harness/operator.hpp"
#include "ame/harness/pipeline.hpp"

namespace ame::config {

/// Any problem with user-supplied configuration. The message is a single line.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Live-session settings.
struct TeleopSettings {
  double command_timeout = 0.5;  ///< dead-man timeout [s]
  int wire_grid_max = 64;        ///< attentiveness grid side limit on the wire
  bool record = true;
};

/// Everything one run needs. Every field has an embedded default, so a minimal
/// document is {"world": "worlds/corridor_1.json"}.
///
/// Document layout (all keys optional):
///   world, scenarios[], method, seed, seeds[], out,
///   camera{width,height,fx,fy,cx,cy,z_near,z_far}, mount{height,pitch_down,yaw_offset},
///   saliency{k_image,k_depth,pyramid_levels,center_scales[],surround_deltas[],orientation_count},
///   grid{resolution,pixel_stride,ground_tolerance}, memory{encoding_scale,decay_rate},
///   field{t_safe,d_safe,alpha,gain,gamma,force_max},
///   robot{v_max,omega_max,deadband,tracking_gain,sensing_radius},
///   loop{tick_rate,max_duration,collision_debounce},
///   operator{heading_gain,cruise_speed,approach_gain,admittance_gain,reaction_latency,
///            attention_mode,scan_amplitude,scan_period,axis_noise,arrive_tolerance,via_tolerance},
///   output{snapshot_every}, teleop{command_timeout,wire_grid_max,record}
/// Unknown keys are rejected.
struct RunConfig {
  std::string world;
  std::vector<std::string> scenarios;  ///< compare set; empty means the seven shipped corridors
  harness::Method method = harness::Method::Amgpf;
  std::uint64_t seed = 1;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::string out = "out";
  harness::PipelineConfig pipeline;
  harness::OperatorModel op;
  int snapshot_every = 0;  ///< 0 disables the attentiveness PNG strip
  TeleopSettings teleop;

  /// Owning-module validations, rethrown as ConfigError.
  void validate() const;
};

[[nodiscard]] nlohmann::json to_json(const RunConfig& config);
/// Throws ConfigError on unknown keys, wrong types or failed validation.
[[nodiscard]] RunConfig from_json(const nlohmann::json& doc);

/// Applies "dotted.path=value" overrides to a document. The value is parsed as
/// JSON when possible, otherwise taken as a string. Paths must name existing keys.
void apply_overrides(nlohmann::json& doc, std::span<const std::string> overrides);

/// Reads the file (if any), applies overrides and parses. An empty path means defaults only.
[[nodiscard]] RunConfig load(const std::filesystem::path& path, std::span<const std::string> overrides = {});

}  // namespace ame::config
