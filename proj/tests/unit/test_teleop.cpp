#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ame/common/codec.hpp"
#include "ame/harness/scenario.hpp"
#include "ame/harness/trial.hpp"
#include "ame/sim/kinematics.hpp"
#include "ame/sim/world_io.hpp"
#include "ame/teleop/outbound.hpp"
#include "ame/teleop/session.hpp"

using namespace ame;
using namespace ame::teleop;
using nlohmann::json;

namespace {

const std::filesystem::path kWorlds = AME_WORLDS_DIR;

sim::World world(const char* name) { return sim::load_world(kWorlds / (std::string(name) + ".json")); }

json command(const Session& s, std::int64_t seq, double forward, double angular) {
  return {{"type", "command"}, {"proto_version", 1}, {"session", s.id()},
          {"seq", seq},        {"forward", forward}, {"angular", angular}};
}

json control(const Session& s, const std::string& action) {
  return {{"type", "control"}, {"proto_version", 1}, {"session", s.id()}, {"action", action}};
}

std::string csv_of(std::span<const harness::TickRecord> ticks) {
  std::ostringstream out;
  harness::write_ticks_csv(out, ticks);
  return out.str();
}

// Scripted-operator axes for a whole trial, as a client would have sent them.
struct Recorded {
  harness::TrialResult trial;
  std::vector<sim::AxisPair> axes;
};

Recorded scripted(const char* name, harness::Method method, std::uint64_t seed) {
  const auto scenario = harness::load_scenario(kWorlds / (std::string(name) + ".json"));
  const config::RunConfig cfg;
  Recorded r{harness::run_trial(scenario, method, cfg.op, cfg.pipeline, seed), {}};
  for (const auto& t : r.trial.ticks) r.axes.push_back(t.axes);
  return r;
}

}  // namespace

TEST_CASE("sessions start paused and only tick while running") {
  Session s("s1", config::RunConfig{}, world("open_field"));
  CHECK(s.state() == SessionState::Paused);
  CHECK_FALSE(s.tick(0.0).has_value());
  CHECK(s.handle_message(control(s, "start"), 0.0)["type"] == "ack");
  CHECK(s.state() == SessionState::Running);
  const auto frame = s.tick(0.0);
  REQUIRE(frame.has_value());
  CHECK((*frame)["type"] == "frame");
  CHECK((*frame)["tick"] == 1);
  s.pause();
  CHECK_FALSE(s.tick(0.1).has_value());
}

TEST_CASE("no client means the robot holds") {
  Session s("s1", config::RunConfig{}, world("open_field"));
  s.start();
  const auto start = s.world().start_pose;
  for (int k = 0; k < 20; ++k) (void)s.tick(0.1 * k);
  CHECK(s.loop().state().x == start.x);
  CHECK(s.loop().state().y == start.y);
}

TEST_CASE("commands expire after the dead-man timeout") {
  config::RunConfig cfg;
  cfg.teleop.command_timeout = 0.5;
  Session s("s1", cfg, world("open_field"));
  s.start();
  (void)s.handle_message(command(s, 1, 1.0, 0.0), 0.0);
  for (int k = 0; k <= 5; ++k) (void)s.tick(0.1 * k);
  CHECK(s.loop().log().back().axes.forward == 1.0);
  for (int k = 6; k < 30; ++k) (void)s.tick(0.1 * k);
  CHECK(s.loop().log().back().axes.forward == 0.0);
  CHECK(std::abs(s.loop().state().v) < 1e-6);
  const double x = s.loop().state().x;
  (void)s.tick(3.0);
  CHECK(s.loop().state().x == doctest::Approx(x).epsilon(1e-9));
}

TEST_CASE("forward deflection advances the robot per step_robot") {
  const config::RunConfig cfg;
  Session s("s1", cfg, world("open_field"));
  s.start();
  (void)s.handle_message(command(s, 1, 1.0, 0.0), 0.0);
  (void)s.tick(0.0);
  const auto& p = cfg.pipeline;
  const auto expected = sim::step_robot(s.world().start_pose, sim::shape_command({1.0, 0.0}, p.deadband, p.limits),
                                        p.dt(), p.tracking_gain);
  CHECK(s.loop().state() == expected);
  CHECK(s.loop().state().x > s.world().start_pose.x);
}

TEST_CASE("half deflection is deadband-shaped") {
  Session s("s1", config::RunConfig{}, world("open_field"));
  s.start();
  (void)s.handle_message(command(s, 1, 0.5, 0.0), 0.0);
  (void)s.tick(0.0);
  CHECK(s.loop().log().back().command.forward == doctest::Approx(0.4444444444444445).epsilon(1e-12));
  CHECK(s.loop().log().back().command.angular == 0.0);
}

TEST_CASE("the latest command wins") {
  Session s("s1", config::RunConfig{}, world("open_field"));
  s.start();
  (void)s.handle_message(command(s, 1, 1.0, 0.0), 0.0);
  (void)s.handle_message(command(s, 2, 0.3, -0.4), 0.01);
  (void)s.tick(0.02);
  CHECK(s.loop().log().back().axes == sim::AxisPair{0.3, -0.4});
}

TEST_CASE("stale sequence numbers are acknowledged and ignored") {
  Session s("s1", config::RunConfig{}, world("open_field"));
  s.start();
  (void)s.handle_message(command(s, 5, 0.8, 0.0), 0.0);
  const auto ack = s.handle_message(command(s, 4, -1.0, 0.0), 0.0);
  CHECK(ack["type"] == "ack");
  CHECK(ack["stale"] == true);
  (void)s.tick(0.0);
  CHECK(s.loop().log().back().axes.forward == 0.8);
}

TEST_CASE("a command after reset applies to the fresh state") {
  Session s("s1", config::RunConfig{}, world("open_field"));
  s.start();
  (void)s.handle_message(command(s, 1, 1.0, 0.0), 0.0);
  for (int k = 0; k < 10; ++k) (void)s.tick(0.1 * k);
  (void)s.handle_message(control(s, "reset"), 1.0);
  CHECK(s.loop().tick() == 0);
  CHECK(s.loop().state() == s.world().start_pose);
  CHECK(s.command_log().axes.empty());
  (void)s.handle_message(command(s, 1, 0.0, 1.0), 1.0);
  const auto frame = s.tick(1.0);
  REQUIRE(frame.has_value());
  CHECK((*frame)["tick"] == 1);
  CHECK(s.loop().log().back().axes == sim::AxisPair{0.0, 1.0});
  CHECK(s.loop().state().theta > 0.0);
  CHECK(s.loop().state().x == s.world().start_pose.x);
}

TEST_CASE("malformed messages leave the session untouched") {
  Session s("s1", config::RunConfig{}, world("open_field"));
  s.start();
  (void)s.handle_message(command(s, 1, 0.7, 0.0), 0.0);
  const std::vector<json> bad{
      json::array(),
      {{"type", "command"}, {"proto_version", 2}, {"session", "s1"}, {"forward", 1}, {"angular", 0}},
      {{"type", "command"}, {"proto_version", 1}, {"session", "s9"}, {"forward", 1}, {"angular", 0}},
      {{"type", "command"}, {"proto_version", 1}, {"session", "s1"}, {"forward", "fast"}, {"angular", 0}},
      {{"type", "command"}, {"proto_version", 1}, {"session", "s1"}, {"seq", 1.5}, {"forward", 1}, {"angular", 0}},
      {{"type", "control"}, {"proto_version", 1}, {"session", "s1"}, {"action", "explode"}},
      {{"type", "control"}, {"proto_version", 1}, {"session", "s1"}, {"action", "method"}, {"method", "apf"}},
      {{"type", "control"}, {"proto_version", 1}, {"session", "s1"}, {"action", "world"}, {"world", "nowhere"}},
      {{"type", "dance"}, {"proto_version", 1}, {"session", "s1"}},
  };
  for (const auto& m : bad) {
    const auto reply = s.handle_message(m, 0.0);
    CHECK(reply["type"] == "error");
    CHECK(reply["message"].is_string());
  }
  CHECK(s.handle_text("{nope", 0.0)["type"] == "error");
  CHECK(s.state() == SessionState::Running);
  CHECK(s.method() == harness::Method::Amgpf);
  (void)s.tick(0.0);
  CHECK(s.loop().log().back().axes.forward == 0.7);
}

TEST_CASE("method and world controls rebuild the trial") {
  const auto catalog = [](const std::string& name) -> std::optional<sim::World> {
    if (name == "back_into_obstacle") return world("back_into_obstacle");
    return std::nullopt;
  };
  Session s("s1", config::RunConfig{}, world("open_field"), catalog);
  s.start();
  (void)s.tick(0.0);
  json m = control(s, "method");
  m["method"] = "gpf";
  const auto ack = s.handle_message(m, 0.0);
  CHECK(ack["method"] == "gpf");
  CHECK(s.method() == harness::Method::Gpf);
  CHECK(s.loop().tick() == 0);
  json w = control(s, "world");
  w["world"] = "back_into_obstacle";
  CHECK(s.handle_message(w, 0.0)["world"] == "back_into_obstacle");
  CHECK(s.world().name == "back_into_obstacle");
  CHECK(s.command_log().world_hash == sim::world_hash(s.world()));
}

TEST_CASE("server sequence numbers increase across replies and frames") {
  Session s("s1", config::RunConfig{}, world("open_field"));
  const auto a = s.handle_message(control(s, "start"), 0.0)["seq"].get<std::uint64_t>();
  const auto b = (*s.tick(0.0))["seq"].get<std::uint64_t>();
  const auto c = s.handle_message(command(s, 1, 0, 0), 0.0)["seq"].get<std::uint64_t>();
  CHECK(a < b);
  CHECK(b < c);
}

TEST_CASE("frames carry pose, force, image and grid") {
  Session s("s1", config::RunConfig{}, world("approach_working_area"));
  s.start();
  const auto frame = *s.tick(0.0);
  CHECK(frame["proto_version"] == 1);
  CHECK(frame["session"] == "s1");
  const auto png = base64_decode(frame["rgb_png"].get<std::string>());
  const auto rgb = decode_png(png);
  CHECK(rgb.width() == 160);
  CHECK(rgb.height() == 120);
  const auto& grid = frame["attentiveness"];
  const auto bytes = base64_decode(grid["data"].get<std::string>());
  CHECK(bytes.size() == grid["width"].get<std::size_t>() * grid["height"].get<std::size_t>());
  CHECK(grid["width"].get<int>() <= 64);
  CHECK(frame["obstacles"].size() >= 1);
  for (const char* key : {"forward", "lateral", "norm", "magnitude"}) CHECK(frame["force"].contains(key));
  for (const char* key : {"x", "y", "theta", "v", "omega"}) CHECK(frame["pose"].contains(key));
  CHECK(frame["metrics"]["dwell_done"].size() == s.world().working_areas.size());
}

TEST_CASE("wire grid block means") {
  memory::AttentivenessMap map(mapping::GridSpec::covering({0, 0, 2, 1}, 0.25));
  map.set({0, 0}, 1.0);
  map.set({1, 0}, 0.5);
  const auto g = downsample_grid(map, 4);
  CHECK(g.factor == 2);
  CHECK(g.width == 4);
  CHECK(g.height == 2);
  CHECK(g.cell_size == 0.5);
  CHECK(g.bytes[0] == static_cast<std::uint8_t>(std::lround(255.0 * 1.5 / 4)));
  CHECK(g.bytes[1] == 0);
  const auto same = downsample_grid(map, 100);
  CHECK(same.factor == 1);
  CHECK(same.bytes[0] == 255);
  CHECK(same.bytes[1] == 128);
  CHECK_THROWS_AS((void)downsample_grid(map, 0), std::invalid_argument);
}

TEST_CASE("scripted axes through a session reproduce run_trial") {
  const auto rec = scripted("approach_working_area", harness::Method::Amgpf, 3);
  Session s("s1", config::RunConfig{}, world("approach_working_area"));
  s.start();
  const double dt = s.config().pipeline.dt();
  for (std::size_t k = 0; k < rec.axes.size(); ++k) {
    s.handle_command(rec.axes[k], dt * static_cast<double>(k));
    REQUIRE(s.tick(dt * static_cast<double>(k)).has_value());
  }
  CHECK(s.state() == SessionState::Finished);
  CHECK(s.ticks_csv() == csv_of(rec.trial.ticks));
}

TEST_CASE("record and replay") {
  const auto rec = scripted("approach_working_area", harness::Method::Amgpf, 2);
  Session s("s1", config::RunConfig{}, world("approach_working_area"));
  s.start();
  const double dt = s.config().pipeline.dt();
  for (std::size_t k = 0; k < rec.axes.size(); ++k) {
    s.handle_command(rec.axes[k], dt * static_cast<double>(k));
    (void)s.tick(dt * static_cast<double>(k));
  }
  const auto log = CommandLog::from_json(s.command_log().to_json());
  CHECK(log.axes.size() == rec.axes.size());

  SUBCASE("same method reproduces the ticks byte for byte") {
    CHECK(csv_of(replay(log, s.world(), harness::Method::Amgpf)) == s.ticks_csv());
  }
  SUBCASE("gpf replay keeps the commands and never renders less") {
    const auto gpf = replay(log, s.world(), harness::Method::Gpf);
    const auto& amgpf = s.loop().log();
    REQUIRE(gpf.size() == amgpf.size());
    double sum_a = 0.0;
    double sum_g = 0.0;
    for (std::size_t k = 0; k < gpf.size(); ++k) {
      CHECK(gpf[k].axes == amgpf[k].axes);
      CHECK(amgpf[k].force.magnitude <= gpf[k].force.magnitude);
      sum_a += amgpf[k].force.norm();
      sum_g += gpf[k].force.norm();
    }
    CHECK(sum_a < sum_g);
  }
  SUBCASE("an edited world is refused") {
    auto edited = s.world();
    edited.obstacles.at(0).footprint.max_y += 0.1;
    CHECK_THROWS_AS((void)replay(log, edited, harness::Method::Amgpf), ReplayMismatch);
  }
}

TEST_CASE("command log json validation") {
  CHECK_THROWS_AS((void)CommandLog::from_json(json::object()), std::invalid_argument);
  CommandLog log;
  log.world_name = "w";
  log.world_hash = "abc";
  log.axes = {{0.5, -0.25}};
  const auto back = CommandLog::from_json(log.to_json());
  CHECK(back.axes == log.axes);
  CHECK(back.world_hash == "abc");
}

TEST_CASE("outbound buffer keeps the newest frames and sends replies first") {
  OutboundBuffer buf(2, 2);
  auto msg = [](const char* s) { return std::make_shared<const std::string>(s); };
  buf.push_frame(msg("f1"));
  buf.push_frame(msg("f2"));
  buf.push_frame(msg("f3"));
  buf.push_reply(msg("r1"));
  CHECK(buf.size() == 3);
  CHECK(buf.dropped() == 1);
  CHECK(*buf.pop() == "r1");
  CHECK(*buf.pop() == "f2");
  CHECK(*buf.pop() == "f3");
  CHECK(buf.pop() == nullptr);
  for (int k = 0; k < 5; ++k) buf.push_reply(msg("r"));
  CHECK(buf.size() == 2);
  CHECK(buf.dropped() == 4);
}
