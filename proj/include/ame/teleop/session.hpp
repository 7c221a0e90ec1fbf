#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ame/config/run_config.hpp"
#include "ame/harness/pipeline.hpp"
#include "ame/sim/world.hpp"

namespace ame::teleop {

inline constexpr int kProtoVersion = 1;

/// Recorded per-tick applied axes plus what is needed to replay them.
struct CommandLog {
  std::string world_name;
  std::string world_hash;
  harness::Method method = harness::Method::Amgpf;
  nlohmann::json config;  ///< RunConfig document
  std::vector<sim::AxisPair> axes;  ///< index = tick

  [[nodiscard]] nlohmann::json to_json() const;
  /// Throws std::invalid_argument on a malformed document.
  [[nodiscard]] static CommandLog from_json(const nlohmann::json& doc);
};

/// Raised when a command log does not belong to the world it is replayed against.
class ReplayMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Re-runs recorded axes through the tick loop under `method`. Stops at the end
/// of the log or when the trial finishes. Throws ReplayMismatch when the world
/// hash differs from the recorded one.
[[nodiscard]] std::vector<harness::TickRecord> replay(const CommandLog& log, const sim::World& world,
                                                      harness::Method method);

enum class SessionState { Paused, Running, Finished };

[[nodiscard]] std::string_view to_string(SessionState state);

/// Resolves a world name from a `world` control message.
using WorldCatalog = std::function<std::optional<sim::World>(const std::string& name)>;

/// One live teleoperation session: the shared tick loop driven by the latest
/// client command. Transport-agnostic and single-threaded; `now` is supplied by
/// the caller in seconds on any monotone clock.
class Session {
 public:
  Session(std::string id, config::RunConfig config, sim::World world, WorldCatalog catalog = {});
  ~Session();
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  /// Parses and applies one client message. Returns the reply (ack or error);
  /// a malformed message leaves the session untouched.
  nlohmann::json handle_message(const nlohmann::json& message, double now);
  /// Same, from raw text.
  nlohmann::json handle_text(const std::string& text, double now);

  /// Latest-wins: replaces any command not yet consumed.
  void handle_command(sim::AxisPair axes, double now);

  /// Advances one tick when running and returns the frame message; nothing otherwise.
  std::optional<nlohmann::json> tick(double now);

  void start();
  void pause();
  /// Fresh trial (same world and method); recorded commands are cleared.
  void reset();
  void select_method(harness::Method method);
  void select_world(sim::World world);

  [[nodiscard]] const std::string& id() const { return id_; }
  [[nodiscard]] SessionState state() const { return state_; }
  [[nodiscard]] harness::Method method() const { return method_; }
  [[nodiscard]] const sim::World& world() const { return world_; }
  [[nodiscard]] const config::RunConfig& config() const { return config_; }
  [[nodiscard]] const harness::TickLoop& loop() const { return *loop_; }
  [[nodiscard]] const CommandLog& command_log() const { return log_; }
  [[nodiscard]] std::uint64_t seq() const { return seq_; }

  [[nodiscard]] std::string ticks_csv() const;
  /// Full-resolution attentiveness snapshot.
  [[nodiscard]] nlohmann::json map_snapshot() const;
  /// Frame message for the current state without advancing.
  [[nodiscard]] nlohmann::json frame_message();

 private:
  class LiveSource;

  void rebuild();
  nlohmann::json reply(std::string_view type);

  std::string id_;
  config::RunConfig config_;
  sim::World world_;
  WorldCatalog catalog_;
  harness::Method method_;
  std::unique_ptr<harness::TickLoop> loop_;
  std::unique_ptr<LiveSource> source_;
  CommandLog log_;
  SessionState state_ = SessionState::Paused;
  std::uint64_t seq_ = 0;
  std::int64_t last_client_seq_ = -1;
};

/// Attentiveness grid reduced by block mean to at most `max_side` cells per
/// side, quantized to bytes (round(255 * m)), row-major with y ascending.
struct WireGrid {
  int width = 0;
  int height = 0;
  int factor = 1;       ///< source cells per wire cell along each axis
  double cell_size = 0.0;
  double origin_x = 0.0;
  double origin_y = 0.0;
  std::vector<std::uint8_t> bytes;
};

[[nodiscard]] WireGrid downsample_grid(const memory::AttentivenessMap& map, int max_side);

}  // namespace ame::teleop
