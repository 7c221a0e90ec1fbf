#include <atomic>
#include <chrono>
#include <csignal>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "ame/config/run_config.hpp"
#include "ame/teleop/server.hpp"

#ifndef AME_WORLDS_DIR
#define AME_WORLDS_DIR "worlds"
#endif

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop.store(true); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Live teleoperation server"};
  ame::teleop::ServerOptions options;
  options.worlds_dir = AME_WORLDS_DIR;
  std::string worlds_dir = options.worlds_dir.string();
  std::string config_path;
  std::vector<std::string> overrides;
  std::string log_level = "info";
  app.add_option("--bind", options.bind, "listen address");
  app.add_option("--port", options.port, "listen port (0 = any free port)");
  app.add_option("--worlds-dir", worlds_dir, "world catalog directory");
  app.add_option("--config", config_path, "default session config (JSON)");
  app.add_option("--override", overrides, "dotted.key=value, repeatable");
  app.add_option("--frame-buffer", options.frame_buffer, "outbound frames kept per connection");
  app.add_option("--max-sessions", options.max_sessions, "concurrent session limit");
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error, off");
  CLI11_PARSE(app, argc, argv);

  spdlog::set_default_logger(spdlog::stderr_color_st("teleop"));
  spdlog::set_level(spdlog::level::from_str(log_level));
  options.worlds_dir = worlds_dir;
  try {
    options.defaults = ame::config::load(config_path, overrides);
  } catch (const ame::config::ConfigError& e) {
    std::cerr << "error[config]: " << e.what() << "\n";
    return 2;
  }

  try {
    ame::teleop::Server server(options);
    const auto port = server.start();
    std::cout << "listening on " << options.bind << ":" << port << std::endl;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    while (!g_stop.load()) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    server.stop();
  } catch (const std::exception& e) {
    std::cerr << "error[runtime]: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
