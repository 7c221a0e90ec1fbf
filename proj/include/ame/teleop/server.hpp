#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>

#include "ame/config/run_config.hpp"

namespace ame::teleop {

struct ServerOptions {
  std::string bind = "127.0.0.1";
  unsigned short port = 8080;  ///< 0 picks a free port
  std::filesystem::path worlds_dir;
  config::RunConfig defaults;
  std::size_t frame_buffer = 4;  ///< outbound frames kept per connection
  std::size_t max_sessions = 16;
};

/// HTTP + WebSocket front end.
///
///   GET    /healthz                 liveness
///   GET    /worlds                  world catalog
///   POST   /sessions                {"world": name, "config": {...}, "autostart": bool}
///   GET    /sessions/{id}/stream    WebSocket: frames out, command/control in
///   GET    /sessions/{id}/log       ticks.csv
///   GET    /sessions/{id}/map       full-resolution attentiveness snapshot
///   GET    /sessions/{id}/commands  recorded command log
///   DELETE /sessions/{id}
///
/// One I/O thread serves all sockets; every session runs its own tick thread.
class Server {
 public:
  explicit Server(ServerOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and starts serving; returns the bound port.
  unsigned short start();
  /// Stops sessions and I/O; idempotent.
  void stop();
  /// Blocks until stop() is called from another thread or a signal handler.
  void wait();

  struct Impl;

 private:
  std::unique_ptr<Impl> impl_;
};

}  // namespace ame::teleop
