#include "ame/harness/operator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ame::harness {

std::string_view to_string(AttentionMode mode) {
  return mode == AttentionMode::ScanPattern ? "scan-pattern" : "camera-follows-heading";
}

AttentionMode parse_attention_mode(std::string_view text) {
  if (text == "camera-follows-heading") return AttentionMode::CameraFollowsHeading;
  if (text == "scan-pattern") return AttentionMode::ScanPattern;
  throw std::invalid_argument("unknown attention mode '" + std::string(text) +
                              "' (expected camera-follows-heading or scan-pattern)");
}

void OperatorModel::validate() const {
  if (!(heading_gain > 0.0)) throw std::invalid_argument("operator: heading gain must be > 0");
  if (!(cruise_speed > 0.0)) throw std::invalid_argument("operator: cruise speed must be > 0");
  if (!(approach_gain > 0.0)) throw std::invalid_argument("operator: approach gain must be > 0");
  if (!(admittance_gain >= 0.0)) throw std::invalid_argument("operator: k_adm must be >= 0");
  if (reaction_latency < 0) throw std::invalid_argument("operator: reaction latency must be >= 0");
  if (!(scan_amplitude >= 0.0)) throw std::invalid_argument("operator: scan amplitude must be >= 0");
  if (!(scan_period > 0.0)) throw std::invalid_argument("operator: scan period must be > 0");
  if (!(axis_noise >= 0.0)) throw std::invalid_argument("operator: axis noise must be >= 0");
  if (!(arrive_tolerance > 0.0 && via_tolerance > 0.0)) {
    throw std::invalid_argument("operator: waypoint tolerances must be > 0");
  }
}

sim::AxisPair scripted_operator_step(const sim::RobotState& state, const Waypoint& waypoint,
                                     const haptics::FeedbackForce& felt, const OperatorModel& model,
                                     const sim::VelocityLimits& limits) {
  const double dx = waypoint.target.x - state.x;
  const double dy = waypoint.target.y - state.y;
  const double dist = std::hypot(dx, dy);

  double v_des = 0.0;
  double omega_des = 0.0;
  if (waypoint.facing && dist < model.arrive_tolerance) {
    const double c = std::cos(state.theta);
    const double s = std::sin(state.theta);
    omega_des = model.heading_gain * sim::normalize_angle(*waypoint.facing - state.theta);
    v_des = std::clamp(model.approach_gain * (dx * c + dy * s), -model.cruise_speed, model.cruise_speed);
  } else if (dist > 0.0) {
    double bearing = std::atan2(dy, dx);
    if (waypoint.reverse) bearing += std::numbers::pi;
    const double error = sim::normalize_angle(bearing - state.theta);
    omega_des = model.heading_gain * error;
    v_des = std::min(model.cruise_speed, model.approach_gain * dist) * std::max(0.0, std::cos(error));
    if (waypoint.reverse) v_des = -v_des;
  }

  sim::AxisPair axes;
  axes.forward = (v_des + model.admittance_gain * felt.forward) / limits.v_max;
  axes.angular = omega_des / limits.omega_max + model.admittance_gain * felt.lateral / limits.v_max;
  axes.forward = std::clamp(axes.forward, -1.0, 1.0);
  axes.angular = std::clamp(axes.angular, -1.0, 1.0);
  return axes;
}

ScriptedOperator::ScriptedOperator(std::vector<Waypoint> route, OperatorModel model, sim::VelocityLimits limits,
                                   std::uint64_t seed)
    : route_(std::move(route)), model_(model), limits_(limits), rng_(seed) {
  model_.validate();
  if (route_.empty()) {
    throw std::invalid_argument("scripted operator: empty route");
  }
}

double ScriptedOperator::head_yaw(double time) const {
  if (model_.attention_mode != AttentionMode::ScanPattern) {
    return 0.0;
  }
  return model_.scan_amplitude * std::sin(2.0 * std::numbers::pi * time / model_.scan_period);
}

void ScriptedOperator::advance(const TickContext& context) {
  while (index_ + 1 < route_.size()) {
    const auto& wp = route_[index_];
    bool done = false;
    if (wp.kind == WaypointKind::Via) {
      done = std::hypot(wp.target.x - context.state.x, wp.target.y - context.state.y) < model_.via_tolerance;
    } else if (wp.kind == WaypointKind::Dwell) {
      const auto k = static_cast<std::size_t>(wp.working_area);
      done = k < context.book.dwell_done.size() && context.book.dwell_done[k];
    }
    if (!done) break;
    ++index_;
  }
}

sim::AxisPair ScriptedOperator::axes(const TickContext& context) {
  advance(context);

  latency_.push_back({context.force.forward, context.force.lateral});
  Felt felt;
  if (latency_.size() > static_cast<std::size_t>(model_.reaction_latency)) {
    felt = latency_.front();
    latency_.pop_front();
  }
  haptics::FeedbackForce hand;
  hand.forward = felt.forward;
  hand.lateral = felt.lateral;

  sim::AxisPair out = scripted_operator_step(context.state, route_[index_], hand, model_, limits_);
  if (model_.axis_noise > 0.0) {
    out.forward = std::clamp(out.forward + model_.axis_noise * noise_(rng_), -1.0, 1.0);
    out.angular = std::clamp(out.angular + model_.axis_noise * noise_(rng_), -1.0, 1.0);
  }
  return out;
}

}  // namespace ame::harness
