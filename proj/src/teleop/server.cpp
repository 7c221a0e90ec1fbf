#include "ame/teleop/server.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <map>
#include <mutex>
#include <thread>
#include <vector>

#include <boost/asio/dispatch.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/post.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <spdlog/spdlog.h>

#include "ame/sim/world_io.hpp"
#include "ame/teleop/outbound.hpp"
#include "ame/teleop/session.hpp"

namespace ame::teleop {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using nlohmann::json;

namespace {

constexpr std::size_t kInboundCapacity = 256;
constexpr auto kHttpTimeout = std::chrono::seconds(30);

double steady_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

class WsConnection;

/// Owns one Session and its tick thread. Inbound client text is queued and
/// applied at the start of the next tick.
class SessionRunner {
 public:
  SessionRunner(std::unique_ptr<Session> session, double period) : session_(std::move(session)), period_(period) {}
  ~SessionRunner() { stop(); }

  void start_thread() { thread_ = std::thread([this] { run(); }); }

  void stop() {
    {
      std::lock_guard lock(wake_mutex_);
      stop_ = true;
    }
    wake_.notify_all();
    if (thread_.joinable()) thread_.join();
  }

  void submit(std::string text, std::weak_ptr<WsConnection> from) {
    std::lock_guard lock(in_mutex_);
    if (inbound_.size() == kInboundCapacity) inbound_.pop_front();
    inbound_.push_back({std::move(text), steady_seconds(), std::move(from)});
  }

  void attach(const std::shared_ptr<WsConnection>& conn);

  template <typename Fn>
  auto with_session(Fn&& fn) {
    std::lock_guard lock(session_mutex_);
    return fn(*session_);
  }

 private:
  struct Inbound {
    std::string text;
    double received = 0.0;
    std::weak_ptr<WsConnection> from;
  };

  void run();
  /// Caller holds subs_mutex_.
  void publish(const std::string& frame);

  std::unique_ptr<Session> session_;
  std::mutex session_mutex_;
  double period_;
  std::mutex in_mutex_;
  std::deque<Inbound> inbound_;
  std::mutex subs_mutex_;
  std::vector<std::weak_ptr<WsConnection>> subscribers_;
  std::mutex wake_mutex_;
  std::condition_variable wake_;
  bool stop_ = false;
  std::thread thread_;
};

class WsConnection : public std::enable_shared_from_this<WsConnection> {
 public:
  WsConnection(tcp::socket&& socket, std::shared_ptr<SessionRunner> runner, std::size_t frame_capacity)
      : ws_(std::move(socket)), runner_(std::move(runner)), out_(frame_capacity) {}

  void run(http::request<http::string_body> request) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(request, beast::bind_front_handler(&WsConnection::on_accept, shared_from_this()));
  }

  void send_frame(std::string text) {
    out_.push_frame(std::make_shared<const std::string>(std::move(text)));
    kick();
  }

  void send_reply(std::string text) {
    out_.push_reply(std::make_shared<const std::string>(std::move(text)));
    kick();
  }

  [[nodiscard]] bool closed() const { return closed_.load(); }

 private:
  void kick() { net::post(ws_.get_executor(), [self = shared_from_this()] { self->flush(); }); }

  void on_accept(beast::error_code ec) {
    if (ec) {
      closed_ = true;
      return;
    }
    runner_->attach(shared_from_this());
    do_read();
  }

  void do_read() {
    ws_.async_read(read_buffer_, beast::bind_front_handler(&WsConnection::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      closed_ = true;
      return;
    }
    runner_->submit(beast::buffers_to_string(read_buffer_.data()), weak_from_this());
    read_buffer_.consume(read_buffer_.size());
    do_read();
  }

  void flush() {
    if (writing_ || closed_) return;
    auto message = out_.pop();
    if (!message) return;
    writing_ = true;
    ws_.text(true);
    ws_.async_write(net::buffer(*message), [self = shared_from_this(), message](beast::error_code ec, std::size_t) {
      self->writing_ = false;
      if (ec) {
        self->closed_ = true;
        return;
      }
      self->flush();
    });
  }

  websocket::stream<beast::tcp_stream> ws_;
  std::shared_ptr<SessionRunner> runner_;
  OutboundBuffer out_;
  beast::flat_buffer read_buffer_;
  bool writing_ = false;
  std::atomic<bool> closed_{false};
};

// The snapshot and the subscription happen under the lock that also covers tick + publish,
// so a new subscriber never sees the same tick twice.
void SessionRunner::attach(const std::shared_ptr<WsConnection>& conn) {
  std::lock_guard lock(subs_mutex_);
  subscribers_.push_back(conn);
  conn->send_frame(with_session([](Session& s) { return s.frame_message().dump(); }));
}

void SessionRunner::publish(const std::string& frame) {
  std::erase_if(subscribers_, [](const std::weak_ptr<WsConnection>& w) {
    auto conn = w.lock();
    return !conn || conn->closed();
  });
  for (const auto& w : subscribers_) {
    if (auto conn = w.lock()) conn->send_frame(frame);
  }
}

void SessionRunner::run() {
  using clock = std::chrono::steady_clock;
  const auto period = std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(period_));
  auto next = clock::now();
  double worst_jitter = 0.0;
  std::uint64_t ticks = 0;
  while (true) {
    std::deque<Inbound> batch;
    {
      std::lock_guard lock(in_mutex_);
      batch.swap(inbound_);
    }
    for (auto& item : batch) {
      auto reply = with_session([&](Session& s) { return s.handle_text(item.text, item.received); });
      if (auto conn = item.from.lock()) conn->send_reply(reply.dump());
    }
    {
      std::lock_guard subs_lock(subs_mutex_);
      auto frame = with_session([](Session& s) { return s.tick(steady_seconds()); });
      if (frame) publish(frame->dump());
    }

    next += period;
    std::unique_lock lock(wake_mutex_);
    if (wake_.wait_until(lock, next, [this] { return stop_; })) break;
    const double jitter = std::chrono::duration<double>(clock::now() - next).count() / period_;
    worst_jitter = std::max(worst_jitter, jitter);
    if (++ticks % 100 == 0) {
      spdlog::debug("session tick jitter: worst {:.1f}% of the period over {} ticks", 100.0 * worst_jitter, ticks);
    }
    if (clock::now() > next + period) next = clock::now();
  }
}

using Response = http::response<http::string_body>;

Response make_response(const http::request<http::string_body>& req, http::status status, std::string body,
                       std::string_view content_type) {
  Response res{status, req.version()};
  res.set(http::field::server, "ame-teleop");
  res.set(http::field::content_type, beast::string_view(content_type.data(), content_type.size()));
  res.set(http::field::access_control_allow_origin, "*");
  res.keep_alive(req.keep_alive());
  res.body() = std::move(body);
  res.prepare_payload();
  return res;
}

Response json_response(const http::request<http::string_body>& req, http::status status, const json& body) {
  return make_response(req, status, body.dump(), "application/json");
}

Response error_response(const http::request<http::string_body>& req, http::status status, const std::string& text) {
  return json_response(req, status, {{"proto_version", kProtoVersion}, {"error", text}});
}

std::vector<std::string> split_path(std::string_view target) {
  const auto q = target.find('?');
  if (q != std::string_view::npos) target = target.substr(0, q);
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= target.size()) {
    const auto slash = target.find('/', start);
    const auto end = slash == std::string_view::npos ? target.size() : slash;
    if (end > start) parts.emplace_back(target.substr(start, end - start));
    if (slash == std::string_view::npos) break;
    start = slash + 1;
  }
  return parts;
}

}  // namespace

struct Server::Impl {
  explicit Impl(ServerOptions opts) : options(std::move(opts)), acceptor(ioc) {}

  ServerOptions options;
  net::io_context ioc;
  tcp::acceptor acceptor;
  std::thread io_thread;
  std::map<std::string, std::pair<std::filesystem::path, sim::World>> catalog;
  std::mutex sessions_mutex;
  std::map<std::string, std::shared_ptr<SessionRunner>> sessions;
  std::uint64_t next_session = 0;
  std::mutex state_mutex;
  std::condition_variable state_cv;
  bool running = false;

  void load_catalog() {
    if (options.worlds_dir.empty() || !std::filesystem::is_directory(options.worlds_dir)) {
      spdlog::warn("world directory '{}' not found; catalog is empty", options.worlds_dir.string());
      return;
    }
    for (const auto& entry : std::filesystem::directory_iterator(options.worlds_dir)) {
      if (entry.path().extension() != ".json") continue;
      try {
        auto world = sim::load_world(entry.path());
        const std::string name = world.name.empty() ? entry.path().stem().string() : world.name;
        catalog.emplace(name, std::make_pair(entry.path(), std::move(world)));
      } catch (const std::exception& e) {
        spdlog::warn("skipping world {}: {}", entry.path().string(), e.what());
      }
    }
  }

  std::optional<sim::World> find_world(const std::string& name) const {
    const auto it = catalog.find(name);
    if (it == catalog.end()) return std::nullopt;
    return it->second.second;
  }

  std::shared_ptr<SessionRunner> find_session(const std::string& id) {
    std::lock_guard lock(sessions_mutex);
    const auto it = sessions.find(id);
    return it == sessions.end() ? nullptr : it->second;
  }

  Response create_session(const http::request<http::string_body>& req) {
    json body = req.body().empty() ? json::object() : json::parse(req.body(), nullptr, false);
    if (body.is_discarded() || !body.is_object()) {
      return error_response(req, http::status::bad_request, "body must be a JSON object");
    }
    config::RunConfig cfg;
    try {
      json doc = config::to_json(options.defaults);
      if (body.contains("config")) {
        if (!body["config"].is_object()) throw config::ConfigError("config: 'config' must be an object");
        doc.merge_patch(body["config"]);
      }
      cfg = config::from_json(doc);
    } catch (const config::ConfigError& e) {
      return error_response(req, http::status::bad_request, e.what());
    }
    std::string world_name;
    if (body.contains("world")) {
      if (!body["world"].is_string()) return error_response(req, http::status::bad_request, "world must be a name");
      world_name = body["world"].get<std::string>();
    } else if (!catalog.empty()) {
      world_name = catalog.begin()->first;
    }
    auto world = find_world(world_name);
    if (!world) return error_response(req, http::status::not_found, "unknown world '" + world_name + "'");
    cfg.world = catalog.at(world_name).first.string();
    const bool autostart = body.value("autostart", false);

    std::lock_guard lock(sessions_mutex);
    if (sessions.size() >= options.max_sessions) {
      return error_response(req, http::status::service_unavailable, "session limit reached");
    }
    const std::string id = "s" + std::to_string(++next_session);
    auto session =
        std::make_unique<Session>(id, cfg, std::move(*world), [this](const std::string& n) { return find_world(n); });
    if (autostart) session->start();
    auto runner = std::make_shared<SessionRunner>(std::move(session), cfg.pipeline.dt());
    runner->start_thread();
    sessions.emplace(id, runner);
    return json_response(req, http::status::created,
                         {{"proto_version", kProtoVersion},
                          {"session", id},
                          {"world", world_name},
                          {"method", std::string(harness::to_string(cfg.method))},
                          {"stream", "/sessions/" + id + "/stream"}});
  }

  Response handle(const http::request<http::string_body>& req) {
    const auto parts = split_path(std::string_view(req.target().data(), req.target().size()));
    const auto method = req.method();
    if (parts.size() == 1 && parts[0] == "healthz" && method == http::verb::get) {
      std::size_t count = 0;
      {
        std::lock_guard lock(sessions_mutex);
        count = sessions.size();
      }
      return json_response(req, http::status::ok,
                           {{"status", "ok"}, {"proto_version", kProtoVersion}, {"sessions", count}});
    }
    if (parts.size() == 1 && parts[0] == "worlds" && method == http::verb::get) {
      json list = json::array();
      for (const auto& [name, entry] : catalog) {
        list.push_back({{"name", name},
                        {"file", entry.first.filename().string()},
                        {"hash", sim::world_hash(entry.second)},
                        {"obstacles", entry.second.obstacles.size()},
                        {"working_areas", entry.second.working_areas.size()}});
      }
      return json_response(req, http::status::ok, {{"proto_version", kProtoVersion}, {"worlds", list}});
    }
    if (parts.size() == 1 && parts[0] == "sessions" && method == http::verb::post) {
      return create_session(req);
    }
    if (parts.size() >= 2 && parts[0] == "sessions") {
      auto runner = find_session(parts[1]);
      if (!runner) return error_response(req, http::status::not_found, "unknown session '" + parts[1] + "'");
      if (parts.size() == 2 && method == http::verb::delete_) {
        {
          std::lock_guard lock(sessions_mutex);
          sessions.erase(parts[1]);
        }
        runner->stop();
        return make_response(req, http::status::no_content, "", "text/plain");
      }
      if (parts.size() == 3 && method == http::verb::get) {
        if (parts[2] == "log") {
          return make_response(req, http::status::ok, runner->with_session([](Session& s) { return s.ticks_csv(); }),
                               "text/csv");
        }
        if (parts[2] == "map") {
          return json_response(req, http::status::ok, runner->with_session([](Session& s) { return s.map_snapshot(); }));
        }
        if (parts[2] == "commands") {
          return json_response(req, http::status::ok,
                               runner->with_session([](Session& s) { return s.command_log().to_json(); }));
        }
        if (parts[2] == "stream") {
          return error_response(req, http::status::upgrade_required, "stream requires a WebSocket upgrade");
        }
      }
    }
    return error_response(req, http::status::not_found, "no route for " + std::string(req.target()));
  }

  void stop_sessions() {
    std::map<std::string, std::shared_ptr<SessionRunner>> doomed;
    {
      std::lock_guard lock(sessions_mutex);
      doomed.swap(sessions);
    }
    for (auto& [id, runner] : doomed) runner->stop();
  }
};

namespace {

class HttpConnection : public std::enable_shared_from_this<HttpConnection> {
 public:
  HttpConnection(tcp::socket&& socket, Server::Impl& server) : stream_(std::move(socket)), server_(server) {}

  void run() {
    net::dispatch(stream_.get_executor(), beast::bind_front_handler(&HttpConnection::do_read, shared_from_this()));
  }

 private:
  void do_read() {
    request_ = {};
    stream_.expires_after(kHttpTimeout);
    http::async_read(stream_, buffer_, request_, beast::bind_front_handler(&HttpConnection::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec == http::error::end_of_stream) {
      stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
      return;
    }
    if (ec) return;
    if (websocket::is_upgrade(request_)) {
      const auto parts = split_path(std::string_view(request_.target().data(), request_.target().size()));
      std::shared_ptr<SessionRunner> runner;
      if (parts.size() == 3 && parts[0] == "sessions" && parts[2] == "stream") runner = server_.find_session(parts[1]);
      if (!runner) {
        send(error_response(request_, http::status::not_found, "no stream at " + std::string(request_.target())));
        return;
      }
      stream_.expires_never();
      std::make_shared<WsConnection>(stream_.release_socket(), runner, server_.options.frame_buffer)
          ->run(std::move(request_));
      return;
    }
    Response res;
    try {
      res = server_.handle(request_);
    } catch (const std::exception& e) {
      res = error_response(request_, http::status::internal_server_error, e.what());
    }
    send(std::move(res));
  }

  void send(Response res) {
    auto sp = std::make_shared<Response>(std::move(res));
    http::async_write(stream_, *sp, [self = shared_from_this(), sp](beast::error_code ec, std::size_t) {
      if (ec) return;
      if (sp->need_eof()) {
        self->stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
        return;
      }
      self->do_read();
    });
  }

  beast::tcp_stream stream_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> request_;
  Server::Impl& server_;
};

void do_accept(Server::Impl& server) {
  server.acceptor.async_accept(net::make_strand(server.ioc), [&server](beast::error_code ec, tcp::socket socket) {
    if (ec) {
      if (ec != net::error::operation_aborted) spdlog::warn("accept failed: {}", ec.message());
      if (!server.acceptor.is_open()) return;
    } else {
      std::make_shared<HttpConnection>(std::move(socket), server)->run();
    }
    do_accept(server);
  });
}

}  // namespace

Server::Server(ServerOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {
  impl_->options.defaults.validate();
  impl_->load_catalog();
}

Server::~Server() { stop(); }

unsigned short Server::start() {
  auto& s = *impl_;
  const tcp::endpoint endpoint{net::ip::make_address(s.options.bind), s.options.port};
  s.acceptor.open(endpoint.protocol());
  s.acceptor.set_option(net::socket_base::reuse_address(true));
  s.acceptor.bind(endpoint);
  s.acceptor.listen(net::socket_base::max_listen_connections);
  const auto port = s.acceptor.local_endpoint().port();
  do_accept(s);
  {
    std::lock_guard lock(s.state_mutex);
    s.running = true;
  }
  s.io_thread = std::thread([&s] { s.ioc.run(); });
  spdlog::info("teleop server listening on {}:{} ({} worlds)", s.options.bind, port, s.catalog.size());
  return port;
}

void Server::stop() {
  auto& s = *impl_;
  s.stop_sessions();
  s.ioc.stop();
  if (s.io_thread.joinable()) s.io_thread.join();
  beast::error_code ec;
  s.acceptor.close(ec);
  {
    std::lock_guard lock(s.state_mutex);
    s.running = false;
  }
  s.state_cv.notify_all();
}

void Server::wait() {
  auto& s = *impl_;
  std::unique_lock lock(s.state_mutex);
  s.state_cv.wait(lock, [&s] { return !s.running; });
}

}  // namespace ame::teleop
