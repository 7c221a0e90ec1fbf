#include "ame/config/run_config.hpp"

#include <fstream>

namespace ame::config {

using nlohmann::json;

namespace {

void check_keys(const json& doc, const json& schema, const std::string& prefix) {
  if (!doc.is_object()) {
    throw ConfigError("config: '" + (prefix.empty() ? std::string("<root>") : prefix) + "' must be an object");
  }
  for (const auto& [key, value] : doc.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (!schema.contains(key)) {
      throw ConfigError("config: unknown key '" + path + "'");
    }
    if (schema.at(key).is_object()) {
      check_keys(value, schema.at(key), path);
    }
  }
}

class Reader {
 public:
  explicit Reader(const json& doc) : doc_(doc) {}

  template <typename T>
  void operator()(const char* section, const char* key, T& out) const {
    const json* node = &doc_;
    std::string path = key;
    if (section != nullptr) {
      node = &doc_.at(section);
      path = std::string(section) + "." + key;
    }
    try {
      out = node->at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError("config: '" + path + "' has the wrong type (got " + std::string(node->at(key).type_name()) +
                        ")");
    }
  }

 private:
  const json& doc_;
};

json load_document(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("config: cannot open config file " + path.string());
  }
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    std::string what = e.what();
    for (char& c : what) {
      if (c == '\n') c = ' ';
    }
    throw ConfigError("config: " + path.string() + " is not valid JSON: " + what);
  }
}

}  // namespace

void RunConfig::validate() const {
  try {
    pipeline.validate();
    op.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (seeds.empty()) throw ConfigError("config: seeds must not be empty");
  if (snapshot_every < 0) throw ConfigError("output: snapshot_every must be >= 0");
  if (!(teleop.command_timeout > 0.0)) throw ConfigError("teleop: command_timeout must be > 0");
  if (teleop.wire_grid_max < 1) throw ConfigError("teleop: wire_grid_max must be >= 1");
}

json to_json(const RunConfig& c) {
  const auto& p = c.pipeline;
  json doc;
  doc["world"] = c.world;
  doc["scenarios"] = c.scenarios;
  doc["method"] = std::string(harness::to_string(c.method));
  doc["seed"] = c.seed;
  doc["seeds"] = c.seeds;
  doc["out"] = c.out;
  doc["camera"] = {{"width", p.camera.width}, {"height", p.camera.height}, {"fx", p.camera.fx},
                   {"fy", p.camera.fy},       {"cx", p.camera.cx},         {"cy", p.camera.cy},
                   {"z_near", p.camera.z_near}, {"z_far", p.camera.z_far}};
  doc["mount"] = {{"height", p.mount.height}, {"pitch_down", p.mount.pitch_down}, {"yaw_offset", p.mount.yaw_offset}};
  doc["saliency"] = {{"k_image", p.saliency.k_image},
                     {"k_depth", p.saliency.k_depth},
                     {"pyramid_levels", p.saliency.pyramid_levels},
                     {"center_scales", p.saliency.center_scales},
                     {"surround_deltas", p.saliency.surround_deltas},
                     {"orientation_count", p.saliency.orientation_count}};
  doc["grid"] = {{"resolution", p.grid_resolution},
                 {"pixel_stride", p.pixel_stride},
                 {"ground_tolerance", p.ground_tolerance}};
  doc["memory"] = {{"encoding_scale", p.memory.encoding_scale}, {"decay_rate", p.memory.decay_rate}};
  doc["field"] = {{"t_safe", p.field.t_safe}, {"d_safe", p.field.d_safe}, {"alpha", p.field.alpha},
                  {"gain", p.field.gain},     {"gamma", p.field.gamma},   {"force_max", p.field.force_max}};
  doc["robot"] = {{"v_max", p.limits.v_max},
                  {"omega_max", p.limits.omega_max},
                  {"deadband", p.deadband},
                  {"tracking_gain", p.tracking_gain},
                  {"sensing_radius", p.sensing_radius}};
  doc["loop"] = {{"tick_rate", p.tick_rate},
                 {"max_duration", p.max_duration},
                 {"collision_debounce", p.collision_debounce}};
  doc["operator"] = {{"heading_gain", c.op.heading_gain},
                     {"cruise_speed", c.op.cruise_speed},
                     {"approach_gain", c.op.approach_gain},
                     {"admittance_gain", c.op.admittance_gain},
                     {"reaction_latency", c.op.reaction_latency},
                     {"attention_mode", std::string(harness::to_string(c.op.attention_mode))},
                     {"scan_amplitude", c.op.scan_amplitude},
                     {"scan_period", c.op.scan_period},
                     {"axis_noise", c.op.axis_noise},
                     {"arrive_tolerance", c.op.arrive_tolerance},
                     {"via_tolerance", c.op.via_tolerance}};
  doc["output"] = {{"snapshot_every", c.snapshot_every}};
  doc["teleop"] = {{"command_timeout", c.teleop.command_timeout},
                   {"wire_grid_max", c.teleop.wire_grid_max},
                   {"record", c.teleop.record}};
  return doc;
}

RunConfig from_json(const json& user) {
  const json defaults = to_json(RunConfig{});
  check_keys(user, defaults, "");
  json doc = defaults;
  doc.merge_patch(user);

  RunConfig c;
  auto& p = c.pipeline;
  const Reader read(doc);
  read(nullptr, "world", c.world);
  read(nullptr, "scenarios", c.scenarios);
  std::string method;
  read(nullptr, "method", method);
  read(nullptr, "seed", c.seed);
  read(nullptr, "seeds", c.seeds);
  read(nullptr, "out", c.out);
  read("camera", "width", p.camera.width);
  read("camera", "height", p.camera.height);
  read("camera", "fx", p.camera.fx);
  read("camera", "fy", p.camera.fy);
  read("camera", "cx", p.camera.cx);
  read("camera", "cy", p.camera.cy);
  read("camera", "z_near", p.camera.z_near);
  read("camera", "z_far", p.camera.z_far);
  read("mount", "height", p.mount.height);
  read("mount", "pitch_down", p.mount.pitch_down);
  read("mount", "yaw_offset", p.mount.yaw_offset);
  read("saliency", "k_image", p.saliency.k_image);
  read("saliency", "k_depth", p.saliency.k_depth);
  read("saliency", "pyramid_levels", p.saliency.pyramid_levels);
  read("saliency", "center_scales", p.saliency.center_scales);
  read("saliency", "surround_deltas", p.saliency.surround_deltas);
  read("saliency", "orientation_count", p.saliency.orientation_count);
  read("grid", "resolution", p.grid_resolution);
  read("grid", "pixel_stride", p.pixel_stride);
  read("grid", "ground_tolerance", p.ground_tolerance);
  read("memory", "encoding_scale", p.memory.encoding_scale);
  read("memory", "decay_rate", p.memory.decay_rate);
  read("field", "t_safe", p.field.t_safe);
  read("field", "d_safe", p.field.d_safe);
  read("field", "alpha", p.field.alpha);
  read("field", "gain", p.field.gain);
  read("field", "gamma", p.field.gamma);
  read("field", "force_max", p.field.force_max);
  read("robot", "v_max", p.limits.v_max);
  read("robot", "omega_max", p.limits.omega_max);
  read("robot", "deadband", p.deadband);
  read("robot", "tracking_gain", p.tracking_gain);
  read("robot", "sensing_radius", p.sensing_radius);
  read("loop", "tick_rate", p.tick_rate);
  read("loop", "max_duration", p.max_duration);
  read("loop", "collision_debounce", p.collision_debounce);
  read("operator", "heading_gain", c.op.heading_gain);
  read("operator", "cruise_speed", c.op.cruise_speed);
  read("operator", "approach_gain", c.op.approach_gain);
  read("operator", "admittance_gain", c.op.admittance_gain);
  read("operator", "reaction_latency", c.op.reaction_latency);
  std::string mode;
  read("operator", "attention_mode", mode);
  read("operator", "scan_amplitude", c.op.scan_amplitude);
  read("operator", "scan_period", c.op.scan_period);
  read("operator", "axis_noise", c.op.axis_noise);
  read("operator", "arrive_tolerance", c.op.arrive_tolerance);
  read("operator", "via_tolerance", c.op.via_tolerance);
  read("output", "snapshot_every", c.snapshot_every);
  read("teleop", "command_timeout", c.teleop.command_timeout);
  read("teleop", "wire_grid_max", c.teleop.wire_grid_max);
  read("teleop", "record", c.teleop.record);
  try {
    c.method = harness::parse_method(method);
    c.op.attention_mode = harness::parse_attention_mode(mode);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

void apply_overrides(json& doc, std::span<const std::string> overrides) {
  const json defaults = to_json(RunConfig{});
  for (const auto& item : overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError("config: override '" + item + "' must look like key=value");
    }
    const std::string key = item.substr(0, eq);
    const std::string text = item.substr(eq + 1);
    std::string pointer = "/" + key;
    for (auto& ch : pointer) {
      if (ch == '.') ch = '/';
    }
    const json::json_pointer ptr(pointer);
    if (!defaults.contains(ptr) || (defaults.at(ptr).is_object())) {
      throw ConfigError("config: unknown override key '" + key + "'");
    }
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;
    doc[ptr] = std::move(value);
  }
}

RunConfig load(const std::filesystem::path& path, std::span<const std::string> overrides) {
  json doc = path.empty() ? json::object() : load_document(path);
  if (!doc.is_object()) {
    throw ConfigError("config: top level of " + path.string() + " must be an object");
  }
  apply_overrides(doc, overrides);
  return from_json(doc);
}

}  // namespace ame::config
