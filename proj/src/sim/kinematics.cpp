#include "ame/sim/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ame::sim {
namespace {

double shape_axis(double a, double deadband, double limit) {
  const double clamped = std::clamp(a, -1.0, 1.0);
  const double magnitude = std::abs(clamped);
  if (magnitude <= deadband) {
    return 0.0;
  }
  const double scaled = (magnitude - deadband) / (1.0 - deadband) * limit;
  return std::copysign(scaled, clamped);
}

}  // namespace

VelocityCommand shape_command(AxisPair raw, double deadband, const VelocityLimits& limits) {
  if (!(deadband >= 0.0 && deadband < 1.0)) {
    throw std::invalid_argument("shape_command: deadband must lie in [0, 1)");
  }
  return {shape_axis(raw.forward, deadband, limits.v_max), shape_axis(raw.angular, deadband, limits.omega_max)};
}

RobotState step_robot(const RobotState& state, const VelocityCommand& cmd, double dt, double tracking_gain) {
  if (!(dt > 0.0)) {
    throw std::invalid_argument("step_robot: dt must be > 0");
  }
  // Blend factor capped at 1 so large k_v * dt lands on the target instead of overshooting.
  const double blend = std::min(1.0, tracking_gain * dt);
  RobotState next = state;
  next.v = state.v + blend * (cmd.forward - state.v);
  next.omega = state.omega + blend * (cmd.angular - state.omega);
  next.x = state.x + next.v * std::cos(state.theta) * dt;
  next.y = state.y + next.v * std::sin(state.theta) * dt;
  next.theta = normalize_angle(state.theta + next.omega * dt);
  return next;
}

}  // namespace ame::sim
