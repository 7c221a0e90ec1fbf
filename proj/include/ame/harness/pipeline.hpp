#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ame/haptics/haptic_field.hpp"
#include "ame/mapping/mapping.hpp"
#include "ame/memory/attention_memory.hpp"
#include "ame/saliency/saliency.hpp"
#include "ame/sim/camera.hpp"
#include "ame/sim/kinematics.hpp"
#include "ame/sim/obstacles.hpp"
#include "ame/sim/render.hpp"
#include "ame/sim/world.hpp"

namespace ame::harness {

/// Haptic rendering method under test.
enum class Method { Amgpf, Gpf };

[[nodiscard]] std::string_view to_string(Method method);
/// Accepts "amgpf" / "gpf"; throws std::invalid_argument otherwise.
[[nodiscard]] Method parse_method(std::string_view text);

/// Every tunable of the closed loop except the operator.
struct PipelineConfig {
  sim::Intrinsics camera;
  sim::CameraMount mount;
  saliency::SaliencyParams saliency;
  double grid_resolution = mapping::kDefaultResolution;
  int pixel_stride = mapping::kDefaultStride;
  double ground_tolerance = mapping::kDefaultGroundTolerance;
  memory::MemoryParams memory;
  haptics::FieldParams field;
  sim::VelocityLimits limits;
  double deadband = 0.1;
  double tracking_gain = 5.0;  ///< k_v [1/s]
  double sensing_radius = sim::kDefaultSensingRadius;
  double tick_rate = 10.0;     ///< [Hz]
  double max_duration = 300.0; ///< [s]
  double collision_debounce = 1.0;  ///< [s]

  [[nodiscard]] double dt() const { return 1.0 / tick_rate; }
  /// Runs every owning module's validation; throws std::invalid_argument.
  void validate() const;
};

/// Working-area and goal bookkeeping for one trial.
struct TrialBook {
  std::vector<double> dwell_timers;  ///< continuous time inside each working area [s]
  std::vector<bool> dwell_done;
  bool goal_reached = false;

  [[nodiscard]] bool all_dwells_done() const;
};

/// What a command source sees when asked for this tick's input.
struct TickContext {
  std::int64_t tick = 0;
  double time = 0.0;
  const sim::RobotState& state;
  const haptics::FeedbackForce& force;
  const TrialBook& book;
};

/// Produces device deflections each tick (scripted operator or live client).
class CommandSource {
 public:
  virtual ~CommandSource() = default;
  /// Head yaw relative to the body heading at `time`.
  [[nodiscard]] virtual double head_yaw(double /*time*/) const { return 0.0; }
  [[nodiscard]] virtual sim::AxisPair axes(const TickContext& context) = 0;
};

struct TickRecord {
  std::int64_t tick = 0;
  double time = 0.0;              ///< end of the tick [s]
  sim::RobotState state;          ///< after the motion step
  sim::AxisPair axes;
  sim::VelocityCommand command;
  haptics::FeedbackForce force;
  double baseline_magnitude = 0.0;  ///< zero-attentiveness R_total on the same observations
  bool collision = false;
  std::size_t visible_cells = 0;
  double map_mean = 0.0;
  double map_max = 0.0;
  int dwells_done = 0;
};

/// Intermediate products of the most recent sensing pass.
struct Perception {
  sim::RgbdFrame frame;
  saliency::SaliencyImage image_saliency;
  saliency::SaliencyImage depth_saliency;
  saliency::SaliencyImage fused;
  mapping::TopDownSaliency topdown;
  std::vector<sim::ObstacleObservation> observations;
};

/// The closed loop, one tick at a time:
/// render -> saliency -> mapping -> memory -> observe -> force -> operator ->
/// shape_command -> step_robot -> collision -> dwell/goal bookkeeping.
///
/// Both methods run the full attentiveness pipeline; only the amgpf force reads the map.
class TickLoop {
 public:
  TickLoop(sim::World world, PipelineConfig config, Method method);

  /// Advances one tick. Calling after finished() is a logic error.
  const TickRecord& step(CommandSource& source);

  [[nodiscard]] bool finished() const { return book_.goal_reached || timed_out(); }
  [[nodiscard]] bool completed() const { return book_.goal_reached; }
  [[nodiscard]] bool timed_out() const;

  [[nodiscard]] const sim::World& world() const { return world_; }
  [[nodiscard]] const PipelineConfig& config() const { return config_; }
  [[nodiscard]] Method method() const { return method_; }
  [[nodiscard]] const sim::RobotState& state() const { return state_; }
  [[nodiscard]] const memory::AttentivenessMap& map() const { return map_; }
  [[nodiscard]] const TrialBook& book() const { return book_; }
  [[nodiscard]] const Perception& perception() const { return perception_; }
  [[nodiscard]] const std::vector<TickRecord>& log() const { return log_; }
  [[nodiscard]] std::int64_t tick() const { return tick_; }

 private:
  sim::World world_;
  PipelineConfig config_;
  Method method_;
  mapping::GridSpec grid_;
  memory::AttentivenessMap map_;
  sim::RobotState state_;
  sim::RobotState prev_state_;
  TrialBook book_;
  Perception perception_;
  std::vector<TickRecord> log_;
  std::int64_t tick_ = 0;
};

}  // namespace ame::harness
