#include <doctest.h>

#include <sys/socket.h>
#include <sys/time.h>

#include <chrono>
#include <optional>
#include <string>
#include <thread>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <json.hpp>

#include "ame/common/codec.hpp"
#include "ame/sim/world_io.hpp"
#include "ame/teleop/server.hpp"
#include "ame/teleop/session.hpp"

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using nlohmann::json;

namespace {

const std::filesystem::path kWorlds = AME_WORLDS_DIR;

struct Reply {
  int status = 0;
  std::string body;
  std::string content_type;
};

Reply request(unsigned short port, http::verb verb, const std::string& target, const std::string& body = {}) {
  net::io_context ioc;
  tcp::resolver resolver(ioc);
  beast::tcp_stream stream(ioc);
  stream.connect(resolver.resolve("127.0.0.1", std::to_string(port)));
  http::request<http::string_body> req{verb, target, 11};
  req.set(http::field::host, "127.0.0.1");
  if (!body.empty()) {
    req.set(http::field::content_type, "application/json");
    req.body() = body;
  }
  req.prepare_payload();
  http::write(stream, req);
  beast::flat_buffer buffer;
  http::response<http::string_body> res;
  http::read(stream, buffer, res);
  beast::error_code ec;
  stream.socket().shutdown(tcp::socket::shutdown_both, ec);
  return {static_cast<int>(res.result_int()), res.body(), std::string(res[http::field::content_type])};
}

struct ServerFixture {
  ame::teleop::Server server;
  unsigned short port;

  explicit ServerFixture(std::size_t frame_buffer = 4) : server(options(frame_buffer)), port(server.start()) {}
  ~ServerFixture() { server.stop(); }

  static ame::teleop::ServerOptions options(std::size_t frame_buffer) {
    ame::teleop::ServerOptions o;
    o.port = 0;
    o.worlds_dir = kWorlds;
    o.frame_buffer = frame_buffer;
    return o;
  }

  std::string create(const json& body) {
    const auto r = request(port, http::verb::post, "/sessions", body.dump());
    REQUIRE(r.status == 201);
    return json::parse(r.body)["session"].get<std::string>();
  }
};

class WsClient {
 public:
  WsClient(unsigned short port, const std::string& target) : ws_(ioc_) {
    tcp::resolver resolver(ioc_);
    net::connect(ws_.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
    timeval tv{0, 200000};
    setsockopt(ws_.next_layer().native_handle(), SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
    ws_.handshake("127.0.0.1", target);
  }

  ~WsClient() {
    beast::error_code ec;
    ws_.next_layer().close(ec);
  }

  void send(const json& message) { ws_.write(net::buffer(message.dump())); }
  void send_text(const std::string& text) { ws_.write(net::buffer(text)); }

  /// Next message, or nullopt once the deadline passes.
  std::optional<json> next(double timeout_s = 3.0) {
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_s);
    while (std::chrono::steady_clock::now() < deadline) {
      beast::error_code ec;
      buffer_.clear();
      ws_.read(buffer_, ec);
      if (!ec) return json::parse(beast::buffers_to_string(buffer_.data()));
      if (ec != net::error::would_block && ec != net::error::try_again && ec != net::error::timed_out) return {};
    }
    return {};
  }

  /// Skips messages until one satisfies pred.
  template <typename Pred>
  std::optional<json> until(Pred pred, double timeout_s = 5.0) {
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_s);
    while (std::chrono::steady_clock::now() < deadline) {
      auto m = next(0.5);
      if (m && pred(*m)) return m;
    }
    return {};
  }

 private:
  net::io_context ioc_;
  websocket::stream<tcp::socket> ws_;
  beast::flat_buffer buffer_;
};

json message(const std::string& session, const std::string& type, std::int64_t seq) {
  return {{"type", type}, {"proto_version", ame::teleop::kProtoVersion}, {"session", session}, {"seq", seq}};
}

json control(const std::string& session, const std::string& action, std::int64_t seq) {
  auto m = message(session, "control", seq);
  m["action"] = action;
  return m;
}

json command(const std::string& session, double forward, double angular, std::int64_t seq) {
  auto m = message(session, "command", seq);
  m["forward"] = forward;
  m["angular"] = angular;
  return m;
}

bool is_type(const json& m, const char* type) { return m.value("type", "") == type; }

}  // namespace

TEST_CASE("health and world catalog") {
  ServerFixture fx;
  const auto health = request(fx.port, http::verb::get, "/healthz");
  CHECK(health.status == 200);
  CHECK(health.content_type == "application/json");
  const auto h = json::parse(health.body);
  CHECK(h["status"] == "ok");
  CHECK(h["proto_version"] == ame::teleop::kProtoVersion);

  const auto worlds = json::parse(request(fx.port, http::verb::get, "/worlds").body)["worlds"];
  REQUIRE(worlds.size() == 10);
  bool found = false;
  for (const auto& w : worlds) {
    CHECK(w["hash"].get<std::string>().size() == 64);
    if (w["name"] == "corridor_1") {
      found = true;
      CHECK(w["hash"] == ame::sim::world_hash(ame::sim::load_world(kWorlds / "corridor_1.json")));
      CHECK(w["working_areas"] == 3);
    }
  }
  CHECK(found);
}

TEST_CASE("session creation validates its input") {
  ServerFixture fx;
  const auto ok = request(fx.port, http::verb::post, "/sessions", R"({"world": "open_field"})");
  REQUIRE(ok.status == 201);
  const auto body = json::parse(ok.body);
  CHECK(body["world"] == "open_field");
  CHECK(body["method"] == "amgpf");
  CHECK(body["stream"] == "/sessions/" + body["session"].get<std::string>() + "/stream");

  CHECK(request(fx.port, http::verb::post, "/sessions", R"({"world": "atlantis"})").status == 404);
  const auto bad_gamma =
      request(fx.port, http::verb::post, "/sessions", R"({"world": "open_field", "config": {"field": {"gamma": 2}}})");
  CHECK(bad_gamma.status == 400);
  CHECK(bad_gamma.body.find("γ ∈ (0, 1]") != std::string::npos);
  CHECK(request(fx.port, http::verb::post, "/sessions", "[1, 2]").status == 400);
  CHECK(request(fx.port, http::verb::post, "/sessions", "{oops").status == 400);
  CHECK(json::parse(request(fx.port, http::verb::get, "/healthz").body)["sessions"] == 1);
}

TEST_CASE("stream: start, drive forward, see the pose advance") {
  ServerFixture fx;
  const auto id = fx.create({{"world", "open_field"}});
  WsClient ws(fx.port, "/sessions/" + id + "/stream");

  const auto first = ws.next();
  REQUIRE(first);
  CHECK(is_type(*first, "frame"));
  CHECK((*first)["state"] == "paused");
  CHECK((*first)["tick"] == 0);
  const double x0 = (*first)["pose"]["x"].get<double>();

  ws.send(control(id, "start", 1));
  const auto ack = ws.until([](const json& m) { return is_type(m, "ack") && m["of"] == "control"; });
  REQUIRE(ack);
  CHECK((*ack)["state"] == "running");
  CHECK((*ack)["ref_seq"] == 1);

  std::int64_t seq = 2;
  std::optional<json> last;
  std::int64_t prev_tick = -1;
  std::int64_t prev_seq = (*ack)["seq"].get<std::int64_t>();
  bool monotone = true;
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(10);
  while (std::chrono::steady_clock::now() < deadline) {
    ws.send(command(id, 1.0, 0.0, seq++));
    auto m = ws.next(0.5);
    if (!m) continue;
    monotone = monotone && (*m)["seq"].get<std::int64_t>() > prev_seq;
    prev_seq = (*m)["seq"].get<std::int64_t>();
    if (!is_type(*m, "frame")) continue;
    monotone = monotone && (*m)["tick"].get<std::int64_t>() > prev_tick;
    prev_tick = (*m)["tick"].get<std::int64_t>();
    last = m;
    if (prev_tick >= 15) break;
  }
  REQUIRE(last);
  CHECK(monotone);
  CHECK((*last)["pose"]["x"].get<double>() > x0 + 0.3);
  CHECK((*last)["axes"]["forward"].get<double>() > 0.9);

  const auto png = ame::base64_decode((*last)["rgb_png"].get<std::string>());
  const auto rgb = ame::decode_png(png);
  CHECK(rgb.width() == 160);
  CHECK(rgb.height() == 120);
  const auto& grid = (*last)["attentiveness"];
  CHECK(grid["width"].get<int>() <= 64);
  CHECK(ame::base64_decode(grid["data"].get<std::string>()).size() ==
        static_cast<std::size_t>(grid["width"].get<int>() * grid["height"].get<int>()));
  CHECK((*last)["metrics"]["displacement"].get<double>() > 0.3);
}

TEST_CASE("malformed messages get error replies and the stream survives") {
  ServerFixture fx;
  const auto id = fx.create({{"world", "open_field"}});
  WsClient ws(fx.port, "/sessions/" + id + "/stream");
  REQUIRE(ws.next());

  ws.send_text("definitely not json");
  auto err = ws.until([](const json& m) { return is_type(m, "error"); });
  REQUIRE(err);
  CHECK((*err)["message"].get<std::string>().find("not JSON") != std::string::npos);

  auto wrong_version = command(id, 1.0, 0.0, 5);
  wrong_version["proto_version"] = 99;
  ws.send(wrong_version);
  err = ws.until([](const json& m) { return is_type(m, "error"); });
  REQUIRE(err);
  CHECK((*err)["ref_seq"] == 5);

  auto no_axes = message(id, "command", 6);
  ws.send(no_axes);
  err = ws.until([](const json& m) { return is_type(m, "error"); });
  REQUIRE(err);
  CHECK((*err)["message"].get<std::string>().find("forward") != std::string::npos);

  ws.send(control(id, "start", 7));
  CHECK(ws.until([](const json& m) { return is_type(m, "ack") && m["state"] == "running"; }));
  CHECK(ws.until([](const json& m) { return is_type(m, "frame") && m["tick"].get<int>() > 0; }));
}

TEST_CASE("dead-man: commands lapse into a stop") {
  ServerFixture fx;
  const auto id = fx.create({{"world", "open_field"}, {"autostart", true}, {"config", {{"teleop", {{"command_timeout", 0.3}}}}}});
  WsClient ws(fx.port, "/sessions/" + id + "/stream");
  for (int k = 0; k < 10; ++k) {
    ws.send(command(id, 1.0, 0.0, k + 1));
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }
  const auto moving = ws.until([](const json& m) { return is_type(m, "frame") && m["axes"]["forward"] == 1.0; });
  REQUIRE(moving);
  // No commands for well over the timeout: the applied axes return to zero and the robot stops.
  const auto stopped = ws.until(
      [](const json& m) {
        return is_type(m, "frame") && m["axes"]["forward"] == 0.0 && std::abs(m["pose"]["v"].get<double>()) < 1e-3;
      },
      8.0);
  REQUIRE(stopped);
  const double x_stop = (*stopped)["pose"]["x"].get<double>();
  std::this_thread::sleep_for(std::chrono::milliseconds(500));
  const auto later = ws.until([](const json& m) { return is_type(m, "frame"); });
  REQUIRE(later);
  CHECK((*later)["pose"]["x"].get<double>() == doctest::Approx(x_stop).epsilon(1e-3));
}

TEST_CASE("log, map, commands and deletion") {
  ServerFixture fx;
  const auto id = fx.create({{"world", "corridor_1"}, {"autostart", true}});
  std::this_thread::sleep_for(std::chrono::milliseconds(1200));

  const auto log = request(fx.port, http::verb::get, "/sessions/" + id + "/log");
  CHECK(log.status == 200);
  CHECK(log.content_type == "text/csv");
  CHECK(log.body.rfind("tick,time,", 0) == 0);
  int lines = 0;
  for (char c : log.body) lines += c == '\n';
  CHECK(lines > 5);

  const auto map = json::parse(request(fx.port, http::verb::get, "/sessions/" + id + "/map").body);
  CHECK(map["type"] == "map");
  CHECK(map["grid"]["width"] == 88);
  CHECK(map["grid"]["height"] == 24);
  REQUIRE(map["values"].size() == 88 * 24);
  double peak = 0.0;
  for (const auto& v : map["values"]) {
    CHECK(v.get<double>() >= 0.0);
    CHECK(v.get<double>() <= 1.0);
    peak = std::max(peak, v.get<double>());
  }
  CHECK(peak > 0.0);

  const auto commands = json::parse(request(fx.port, http::verb::get, "/sessions/" + id + "/commands").body);
  CHECK(commands["world_name"] == "corridor_1");
  CHECK(commands["world_hash"] == ame::sim::world_hash(ame::sim::load_world(kWorlds / "corridor_1.json")));
  CHECK(commands["axes"].size() > 5);

  CHECK(request(fx.port, http::verb::get, "/sessions/" + id + "/stream").status == 426);
  CHECK(request(fx.port, http::verb::get, "/nowhere").status == 404);
  CHECK(request(fx.port, http::verb::get, "/sessions/zzz/log").status == 404);
  CHECK(request(fx.port, http::verb::delete_, "/sessions/" + id).status == 204);
  CHECK(request(fx.port, http::verb::get, "/sessions/" + id + "/log").status == 404);
  CHECK_THROWS(WsClient(fx.port, "/sessions/" + id + "/stream"));
}

TEST_CASE("a stalled reader catches up on newer frames") {
  ServerFixture fx(2);
  const auto id = fx.create({{"world", "corridor_2"}, {"autostart", true}});
  WsClient ws(fx.port, "/sessions/" + id + "/stream");
  std::this_thread::sleep_for(std::chrono::milliseconds(2500));
  const auto head = request(fx.port, http::verb::get, "/sessions/" + id + "/log");
  int server_ticks = -1;
  for (char c : head.body) server_ticks += c == '\n';

  std::int64_t prev = -1;
  bool increasing = true;
  std::int64_t latest = -1;
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(5);
  while (std::chrono::steady_clock::now() < deadline) {
    auto m = ws.next(0.3);
    if (!m || !is_type(*m, "frame")) continue;
    const auto tick = (*m)["tick"].get<std::int64_t>();
    increasing = increasing && tick > prev;
    prev = tick;
    latest = tick;
    if (latest >= server_ticks + 5) break;
  }
  CHECK(increasing);
  CHECK(latest >= server_ticks);
}

TEST_CASE("server stop is idempotent and frees the port") {
  auto fx = std::make_unique<ServerFixture>();
  const auto port = fx->port;
  fx->server.stop();
  fx->server.stop();
  CHECK_THROWS(request(port, http::verb::get, "/healthz"));
  fx.reset();
}
