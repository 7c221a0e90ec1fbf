#pragma once

#include "ame/sim/world.hpp"

namespace ame::sim {

struct VelocityLimits {
  double v_max = 1.0;      ///< [m/s]
  double omega_max = 1.5;  ///< [rad/s]
};

/// Target velocities for the robot's low-level controller.
struct VelocityCommand {
  double forward = 0.0;
  double angular = 0.0;

  friend bool operator==(const VelocityCommand&, const VelocityCommand&) = default;
};

/// Raw input-device deflection, each axis in [-1, 1].
struct AxisPair {
  double forward = 0.0;
  double angular = 0.0;

  friend bool operator==(const AxisPair&, const AxisPair&) = default;
};

/// Deadband plus linear map of device deflection to target velocity.
/// |a| <= deadband gives zero; outside, output ramps linearly from zero at the
/// deadband edge to the limit at full deflection. Inputs are clamped to [-1, 1].
[[nodiscard]] VelocityCommand shape_command(AxisPair raw, double deadband, const VelocityLimits& limits);

/// Planar unicycle with first-order velocity tracking (gain `tracking_gain`, 1/s).
[[nodiscard]] RobotState step_robot(const RobotState& state, const VelocityCommand& cmd, double dt,
                                    double tracking_gain = 5.0);

}  // namespace ame::sim
