#include "ame/sim/world_io.hpp"

#include <fstream>
#include <stdexcept>

#include "ame/common/codec.hpp"

namespace ame::sim {
namespace {

using nlohmann::json;

Rect rect_from_json(const json& j) {
  const auto& lo = j.at("min");
  const auto& hi = j.at("max");
  return {lo.at(0).get<double>(), lo.at(1).get<double>(), hi.at(0).get<double>(), hi.at(1).get<double>()};
}

json rect_to_json(const Rect& r) { return {{"min", {r.min_x, r.min_y}}, {"max", {r.max_x, r.max_y}}}; }

Rgb color_from_json(const json& j) {
  auto channel = [&](int k) {
    const int value = j.at(k).get<int>();
    if (value < 0 || value > 255) {
      throw std::invalid_argument("color channel out of range 0-255");
    }
    return static_cast<std::uint8_t>(value);
  };
  return {channel(0), channel(1), channel(2)};
}

json color_to_json(Rgb c) { return json::array({c.r, c.g, c.b}); }

}  // namespace

World world_from_json(const json& doc) {
  const int version = doc.value("schema_version", -1);
  if (version != kWorldSchemaVersion) {
    throw std::invalid_argument("world: unsupported schema_version " + std::to_string(version));
  }
  World world;
  world.name = doc.value("name", std::string{});
  world.bounds = rect_from_json(doc.at("bounds"));
  if (doc.contains("floor_color")) {
    world.floor_color = color_from_json(doc.at("floor_color"));
  }
  int next_id = 0;
  for (const auto& o : doc.at("obstacles")) {
    Box box;
    box.id = o.value("id", next_id);
    next_id = box.id + 1;
    box.footprint = rect_from_json(o);
    box.height = o.at("height").get<double>();
    if (o.contains("color")) {
      box.color = color_from_json(o.at("color"));
    }
    world.obstacles.push_back(box);
  }
  for (const auto& w : doc.value("working_areas", json::array())) {
    WorkingArea wa;
    wa.area = rect_from_json(w);
    wa.dwell_seconds = w.value("dwell", 15.0);
    const auto approach = w.value("approach", std::string{"forward"});
    if (approach == "forward") {
      wa.approach = Approach::Forward;
    } else if (approach == "reverse") {
      wa.approach = Approach::Reverse;
    } else {
      throw std::invalid_argument("world: approach must be \"forward\" or \"reverse\"");
    }
    world.working_areas.push_back(wa);
  }
  world.goal = rect_from_json(doc.at("goal"));
  const auto& s = doc.at("start_pose");
  world.start_pose.x = s.at("x").get<double>();
  world.start_pose.y = s.at("y").get<double>();
  world.start_pose.theta = normalize_angle(s.value("theta", 0.0));
  world.start_pose.footprint_radius = s.value("footprint_radius", 0.25);
  world.start_pose.body_height = s.value("body_height", 1.2);
  world.validate();
  return world;
}

json world_to_json(const World& world) {
  json doc;
  doc["schema_version"] = kWorldSchemaVersion;
  doc["name"] = world.name;
  doc["bounds"] = rect_to_json(world.bounds);
  doc["floor_color"] = color_to_json(world.floor_color);
  doc["obstacles"] = json::array();
  for (const auto& box : world.obstacles) {
    json o = rect_to_json(box.footprint);
    o["id"] = box.id;
    o["height"] = box.height;
    o["color"] = color_to_json(box.color);
    doc["obstacles"].push_back(o);
  }
  doc["working_areas"] = json::array();
  for (const auto& wa : world.working_areas) {
    json w = rect_to_json(wa.area);
    w["dwell"] = wa.dwell_seconds;
    w["approach"] = wa.approach == Approach::Forward ? "forward" : "reverse";
    doc["working_areas"].push_back(w);
  }
  doc["goal"] = rect_to_json(world.goal);
  doc["start_pose"] = {{"x", world.start_pose.x},
                       {"y", world.start_pose.y},
                       {"theta", world.start_pose.theta},
                       {"footprint_radius", world.start_pose.footprint_radius},
                       {"body_height", world.start_pose.body_height}};
  return doc;
}

World load_world(const std::filesystem::path& path) {
  std::ifstream file(path);
  if (!file) {
    throw std::runtime_error("world file not found: " + path.string());
  }
  try {
    return world_from_json(json::parse(file));
  } catch (const std::exception& e) {
    throw std::runtime_error("invalid world file " + path.string() + ": " + e.what());
  }
}

void save_world(const std::filesystem::path& path, const World& world) {
  std::ofstream file(path);
  if (!file) {
    throw std::runtime_error("cannot write world file " + path.string());
  }
  file << world_to_json(world).dump(2) << '\n';
}

std::string world_hash(const World& world) { return sha256_hex(world_to_json(world).dump()); }

}  // namespace ame::sim
