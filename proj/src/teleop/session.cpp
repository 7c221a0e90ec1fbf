#include "ame/teleop/session.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ame/common/codec.hpp"
#include "ame/harness/trial.hpp"
#include "ame/sim/world_io.hpp"

namespace ame::teleop {

using nlohmann::json;

nlohmann::json CommandLog::to_json() const {
  json axes_doc = json::array();
  for (const auto& a : axes) axes_doc.push_back({a.forward, a.angular});
  return {{"proto_version", kProtoVersion},
          {"world_name", world_name},
          {"world_hash", world_hash},
          {"method", std::string(harness::to_string(method))},
          {"config", config},
          {"axes", axes_doc}};
}

CommandLog CommandLog::from_json(const nlohmann::json& doc) {
  try {
    CommandLog log;
    if (doc.at("proto_version").get<int>() != kProtoVersion) {
      throw std::invalid_argument("command log: unsupported proto_version");
    }
    log.world_name = doc.at("world_name").get<std::string>();
    log.world_hash = doc.at("world_hash").get<std::string>();
    log.method = harness::parse_method(doc.at("method").get<std::string>());
    log.config = doc.at("config");
    for (const auto& a : doc.at("axes")) {
      log.axes.push_back({a.at(0).get<double>(), a.at(1).get<double>()});
    }
    return log;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("command log: ") + e.what());
  }
}

namespace {

class ReplaySource final : public harness::CommandSource {
 public:
  explicit ReplaySource(const std::vector<sim::AxisPair>& axes) : axes_(axes) {}
  sim::AxisPair axes(const harness::TickContext& context) override {
    return axes_[static_cast<std::size_t>(context.tick)];
  }

 private:
  const std::vector<sim::AxisPair>& axes_;
};

json pose_json(const sim::RobotState& s) {
  return {{"x", s.x}, {"y", s.y}, {"theta", s.theta}, {"v", s.v}, {"omega", s.omega}};
}

}  // namespace

std::vector<harness::TickRecord> replay(const CommandLog& log, const sim::World& world, harness::Method method) {
  const std::string hash = sim::world_hash(world);
  if (hash != log.world_hash) {
    throw ReplayMismatch("replay refused: world hash " + hash + " does not match recorded " + log.world_hash);
  }
  const auto cfg = config::from_json(log.config);
  harness::TickLoop loop(world, cfg.pipeline, method);
  ReplaySource source(log.axes);
  while (!loop.finished() && static_cast<std::size_t>(loop.tick()) < log.axes.size()) {
    loop.step(source);
  }
  return loop.log();
}

std::string_view to_string(SessionState state) {
  switch (state) {
    case SessionState::Paused: return "paused";
    case SessionState::Running: return "running";
    case SessionState::Finished: return "finished";
  }
  return "paused";
}

class Session::LiveSource final : public harness::CommandSource {
 public:
  explicit LiveSource(double timeout) : timeout_(timeout) {}

  void set(sim::AxisPair axes, double stamp) {
    latest_ = axes;
    stamp_ = stamp;
  }
  void clear() { latest_.reset(); }
  void set_now(double now) { now_ = now; }

  sim::AxisPair axes(const harness::TickContext&) override {
    if (latest_ && now_ - stamp_ <= timeout_) return *latest_;
    return {};
  }

 private:
  double timeout_;
  std::optional<sim::AxisPair> latest_;
  double stamp_ = 0.0;
  double now_ = 0.0;
};

Session::Session(std::string id, config::RunConfig config, sim::World world, WorldCatalog catalog)
    : id_(std::move(id)),
      config_(std::move(config)),
      world_(std::move(world)),
      catalog_(std::move(catalog)),
      method_(config_.method) {
  config_.validate();
  rebuild();
}

Session::~Session() = default;

void Session::rebuild() {
  config_.method = method_;
  loop_ = std::make_unique<harness::TickLoop>(world_, config_.pipeline, method_);
  source_ = std::make_unique<LiveSource>(config_.teleop.command_timeout);
  log_ = CommandLog{};
  log_.world_name = world_.name;
  log_.world_hash = sim::world_hash(world_);
  log_.method = method_;
  log_.config = config::to_json(config_);
  last_client_seq_ = -1;
  if (state_ == SessionState::Finished) state_ = SessionState::Paused;
}

void Session::start() {
  if (state_ == SessionState::Paused) state_ = SessionState::Running;
}

void Session::pause() {
  if (state_ == SessionState::Running) state_ = SessionState::Paused;
}

void Session::reset() { rebuild(); }

void Session::select_method(harness::Method method) {
  method_ = method;
  rebuild();
}

void Session::select_world(sim::World world) {
  world.validate();
  world_ = std::move(world);
  rebuild();
}

void Session::handle_command(sim::AxisPair axes, double now) { source_->set(axes, now); }

json Session::reply(std::string_view type) {
  return {{"type", type}, {"proto_version", kProtoVersion}, {"session", id_}, {"seq", ++seq_}};
}

json Session::handle_text(const std::string& text, double now) {
  const json message = json::parse(text, nullptr, false);
  if (message.is_discarded()) {
    json err = reply("error");
    err["message"] = "malformed message: not JSON";
    return err;
  }
  return handle_message(message, now);
}

json Session::handle_message(const json& message, double now) {
  auto error = [&](const std::string& text) {
    json err = reply("error");
    err["message"] = text;
    if (message.is_object() && message.contains("seq")) err["ref_seq"] = message["seq"];
    return err;
  };
  if (!message.is_object()) return error("malformed message: expected an object");
  if (!message.contains("type") || !message["type"].is_string()) return error("malformed message: missing type");
  if (!message.contains("proto_version") || message["proto_version"] != kProtoVersion) {
    return error("unsupported proto_version (expected " + std::to_string(kProtoVersion) + ")");
  }
  if (!message.contains("session") || message["session"] != id_) return error("session id mismatch");
  if (message.contains("seq") && !message["seq"].is_number_integer()) return error("malformed message: seq");

  const std::string type = message["type"].get<std::string>();
  if (type == "command") {
    const auto& f = message.value("forward", json());
    const auto& a = message.value("angular", json());
    if (!f.is_number() || !a.is_number()) return error("malformed command: forward and angular must be numbers");
    const double forward = f.get<double>();
    const double angular = a.get<double>();
    if (!std::isfinite(forward) || !std::isfinite(angular)) return error("malformed command: non-finite axis");
    json ack = reply("ack");
    ack["of"] = "command";
    if (message.contains("seq")) {
      const auto client_seq = message["seq"].get<std::int64_t>();
      ack["ref_seq"] = client_seq;
      if (client_seq <= last_client_seq_) {
        ack["stale"] = true;
        return ack;
      }
      last_client_seq_ = client_seq;
    }
    handle_command({std::clamp(forward, -1.0, 1.0), std::clamp(angular, -1.0, 1.0)}, now);
    return ack;
  }
  if (type == "control") {
    if (!message.contains("action") || !message["action"].is_string()) return error("malformed control: action");
    const std::string action = message["action"].get<std::string>();
    if (action == "start") {
      start();
    } else if (action == "pause") {
      pause();
    } else if (action == "reset") {
      reset();
    } else if (action == "method") {
      if (!message.contains("method") || !message["method"].is_string()) return error("malformed control: method");
      try {
        select_method(harness::parse_method(message["method"].get<std::string>()));
      } catch (const std::invalid_argument& e) {
        return error(e.what());
      }
    } else if (action == "world") {
      if (!message.contains("world") || !message["world"].is_string()) return error("malformed control: world");
      const auto name = message["world"].get<std::string>();
      std::optional<sim::World> world = catalog_ ? catalog_(name) : std::nullopt;
      if (!world) return error("unknown world '" + name + "'");
      select_world(std::move(*world));
    } else {
      return error("unknown control action '" + action + "'");
    }
    json ack = reply("ack");
    ack["of"] = "control";
    ack["action"] = action;
    ack["state"] = std::string(to_string(state_));
    ack["method"] = std::string(harness::to_string(method_));
    ack["world"] = world_.name;
    if (message.contains("seq")) ack["ref_seq"] = message["seq"];
    return ack;
  }
  return error("unknown message type '" + type + "'");
}

std::optional<json> Session::tick(double now) {
  if (state_ != SessionState::Running) return std::nullopt;
  source_->set_now(now);
  const auto& record = loop_->step(*source_);
  log_.axes.push_back(record.axes);
  if (loop_->finished()) state_ = SessionState::Finished;
  return frame_message();
}

json Session::frame_message() {
  json frame = reply("frame");
  const auto& loop = *loop_;
  frame["tick"] = loop.tick();
  frame["time"] = static_cast<double>(loop.tick()) * config_.pipeline.dt();
  frame["state"] = std::string(to_string(state_));
  frame["method"] = std::string(harness::to_string(method_));
  frame["world"] = world_.name;
  frame["pose"] = pose_json(loop.state());

  const auto& perception = loop.perception();
  frame["rgb_png"] = perception.frame.rgb.empty() ? std::string() : base64_encode(encode_png(perception.frame.rgb));

  json force = {{"forward", 0.0}, {"lateral", 0.0}, {"norm", 0.0}, {"magnitude", 0.0}};
  json obstacles = json::array();
  json axes = {{"forward", 0.0}, {"angular", 0.0}};
  if (!loop.log().empty()) {
    const auto& last = loop.log().back();
    force = {{"forward", last.force.forward},
             {"lateral", last.force.lateral},
             {"norm", last.force.norm()},
             {"magnitude", last.force.magnitude}};
    for (const auto& o : last.force.per_obstacle) {
      obstacles.push_back({{"id", o.obstacle_id},
                           {"distance", o.distance},
                           {"closing_speed", o.closing_speed},
                           {"repulsion", o.repulsion},
                           {"attentiveness", o.attentiveness},
                           {"attn_repulsion", o.attn_repulsion},
                           {"weight", o.weight}});
    }
    axes = {{"forward", last.axes.forward}, {"angular", last.axes.angular}};
  }
  frame["force"] = force;
  frame["obstacles"] = obstacles;
  frame["axes"] = axes;

  const auto grid = downsample_grid(loop.map(), config_.teleop.wire_grid_max);
  frame["attentiveness"] = {{"width", grid.width},
                            {"height", grid.height},
                            {"cell_size", grid.cell_size},
                            {"origin_x", grid.origin_x},
                            {"origin_y", grid.origin_y},
                            {"data", base64_encode(grid.bytes)}};

  json metrics = {{"elapsed", frame["time"]},
                  {"collisions", 0},
                  {"displacement", 0.0},
                  {"average_speed", 0.0},
                  {"average_force", 0.0}};
  if (!loop.log().empty()) {
    const auto m = harness::compute_metrics(loop.log(), world_.start_pose.position(), config_.pipeline.dt(),
                                            config_.pipeline.collision_debounce);
    metrics["collisions"] = m.collisions;
    metrics["displacement"] = m.total_displacement;
    metrics["average_speed"] = m.average_speed;
    metrics["average_force"] = m.average_feedback_force;
  }
  metrics["dwell_timers"] = loop.book().dwell_timers;
  metrics["dwell_done"] = loop.book().dwell_done;
  metrics["goal_reached"] = loop.book().goal_reached;
  frame["metrics"] = metrics;
  return frame;
}

std::string Session::ticks_csv() const {
  std::ostringstream out;
  harness::write_ticks_csv(out, loop_->log());
  return out.str();
}

json Session::map_snapshot() const {
  const auto& map = loop_->map();
  const auto& g = map.grid();
  return {{"type", "map"},
          {"proto_version", kProtoVersion},
          {"session", id_},
          {"tick", loop_->tick()},
          {"grid",
           {{"resolution", g.resolution}, {"origin_x", g.origin_x}, {"origin_y", g.origin_y}, {"width", g.width},
            {"height", g.height}}},
          {"values", map.values()}};
}

WireGrid downsample_grid(const memory::AttentivenessMap& map, int max_side) {
  if (max_side < 1) throw std::invalid_argument("downsample_grid: max_side must be >= 1");
  const auto& g = map.grid();
  WireGrid out;
  out.factor = std::max(1, (std::max(g.width, g.height) + max_side - 1) / max_side);
  out.width = (g.width + out.factor - 1) / out.factor;
  out.height = (g.height + out.factor - 1) / out.factor;
  out.cell_size = g.resolution * out.factor;
  out.origin_x = g.origin_x;
  out.origin_y = g.origin_y;
  out.bytes.resize(static_cast<std::size_t>(out.width) * static_cast<std::size_t>(out.height));
  for (int bj = 0; bj < out.height; ++bj) {
    for (int bi = 0; bi < out.width; ++bi) {
      double sum = 0.0;
      int count = 0;
      for (int j = bj * out.factor; j < std::min(g.height, (bj + 1) * out.factor); ++j) {
        for (int i = bi * out.factor; i < std::min(g.width, (bi + 1) * out.factor); ++i) {
          sum += map.at({i, j});
          ++count;
        }
      }
      const double mean = sum / count;
      out.bytes[static_cast<std::size_t>(bj) * out.width + bi] =
          static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(mean, 0.0, 1.0)));
    }
  }
  return out;
}

}  // namespace ame::teleop
