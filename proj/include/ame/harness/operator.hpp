#pragma once

#include <cstdint>
#include <deque>
#include <random>
#include <string_view>
#include <vector>

#include "ame/harness/pipeline.hpp"
#include "ame/harness/scenario.hpp"

namespace ame::harness {

enum class AttentionMode { CameraFollowsHeading, ScanPattern };

[[nodiscard]] std::string_view to_string(AttentionMode mode);
[[nodiscard]] AttentionMode parse_attention_mode(std::string_view text);

/// Deterministic stand-in for a human operator holding an admittance-coupled stick.
struct OperatorModel {
  double heading_gain = 2.0;      ///< k_p: angular rate per radian of heading error [1/s]
  double cruise_speed = 0.6;      ///< [m/s]
  double approach_gain = 1.0;     ///< speed per meter of remaining distance near a waypoint [1/s]
  double admittance_gain = 0.03;  ///< k_adm [(m/s)/N]
  int reaction_latency = 2;       ///< force reaches the hand this many ticks late
  AttentionMode attention_mode = AttentionMode::CameraFollowsHeading;
  double scan_amplitude = 0.5;    ///< head yaw amplitude in scan mode [rad]
  double scan_period = 6.0;       ///< [s]
  double axis_noise = 0.02;       ///< std-dev of per-tick axis jitter
  double arrive_tolerance = 0.15; ///< dwell/goal hold radius [m]
  double via_tolerance = 0.3;     ///< staging point pass radius [m]

  /// Throws std::invalid_argument (k_adm >= 0, latency >= 0, positive speeds and tolerances).
  void validate() const;
};

/// One noise-free operator decision.
///
/// Pursuit: heading error e to the waypoint (bearing + pi on reverse legs),
/// omega = k_p * e, v = min(cruise, approach_gain * dist) * max(0, cos e), negated
/// on reverse legs. Inside arrive_tolerance of a waypoint with a facing, the
/// operator turns to the facing and trims the along-heading error instead.
/// Admittance: forward axis + k_adm * f_forward / v_max, angular axis
/// + k_adm * f_lateral / v_max, both clamped to [-1, 1].
[[nodiscard]] sim::AxisPair scripted_operator_step(const sim::RobotState& state, const Waypoint& waypoint,
                                                   const haptics::FeedbackForce& felt, const OperatorModel& model,
                                                   const sim::VelocityLimits& limits);

/// Route-following operator with a force latency buffer and seeded axis noise.
class ScriptedOperator final : public CommandSource {
 public:
  ScriptedOperator(std::vector<Waypoint> route, OperatorModel model, sim::VelocityLimits limits, std::uint64_t seed);

  [[nodiscard]] double head_yaw(double time) const override;
  [[nodiscard]] sim::AxisPair axes(const TickContext& context) override;

  [[nodiscard]] std::size_t waypoint_index() const { return index_; }

 private:
  struct Felt {
    double forward = 0.0;
    double lateral = 0.0;
  };

  void advance(const TickContext& context);

  std::vector<Waypoint> route_;
  OperatorModel model_;
  sim::VelocityLimits limits_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> noise_{0.0, 1.0};
  std::deque<Felt> latency_;
  std::size_t index_ = 0;
};

}  // namespace ame::harness
