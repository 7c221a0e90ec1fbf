#include "ame/haptics/haptic_field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <spdlog/spdlog.h>

namespace ame::haptics {
namespace {

double attentiveness_at(const sim::ObstacleObservation& obs, const memory::AttentivenessMap& map) {
  const auto m = map.lookup(obs.x, obs.y);
  if (!m) {
    spdlog::debug("obstacle {} point ({:.3f}, {:.3f}) outside the attentiveness grid; using m = 0", obs.obstacle_id,
                  obs.x, obs.y);
    return 0.0;
  }
  return *m;
}

template <typename AttentivenessFn>
FeedbackForce combine(std::span<const sim::ObstacleObservation> observations, const FieldParams& params,
                      const sim::RobotState& robot, AttentivenessFn&& attentiveness) {
  FeedbackForce out;
  double total_abs = 0.0;
  for (const auto& obs : observations) {
    ObstacleRepulsion rep;
    rep.obstacle_id = obs.obstacle_id;
    rep.distance = obs.distance;
    rep.closing_speed = obs.closing_speed;
    rep.repulsion = repulsion(obs.distance, obs.closing_speed, params);
    rep.attentiveness = attentiveness(obs);
    rep.attn_repulsion = rep.repulsion * (1.0 - params.gamma * rep.attentiveness);
    total_abs += std::abs(rep.attn_repulsion);
    out.per_obstacle.push_back(rep);
  }
  if (!(total_abs > 0.0)) {
    return out;
  }

  double dir_x = 0.0;
  double dir_y = 0.0;
  for (std::size_t k = 0; k < observations.size(); ++k) {
    auto& rep = out.per_obstacle[k];
    rep.weight = std::abs(rep.attn_repulsion) / total_abs;
    out.magnitude += rep.weight * rep.attn_repulsion;
    const double ax = robot.x - observations[k].x;
    const double ay = robot.y - observations[k].y;
    const double len = std::hypot(ax, ay);
    if (len > 0.0) {
      dir_x += rep.weight * ax / len;
      dir_y += rep.weight * ay / len;
    }
  }
  out.magnitude = std::clamp(out.magnitude, 0.0, 1.0);
  const double len = std::hypot(dir_x, dir_y);
  if (len > 1e-12) {
    const double wx = dir_x / len;
    const double wy = dir_y / len;
    const double c = std::cos(robot.theta);
    const double s = std::sin(robot.theta);
    const double scale = params.force_max * out.magnitude;
    out.forward = scale * (c * wx + s * wy);
    out.lateral = scale * (-s * wx + c * wy);
  }
  return out;
}

}  // namespace

void FieldParams::validate() const {
  if (!(t_safe > 0.0)) throw std::invalid_argument("field: t_safe must be > 0");
  if (!(d_safe > 0.0)) throw std::invalid_argument("field: d_safe must be > 0");
  if (!(gain > 0.0)) throw std::invalid_argument("field: gain G must be > 0");
  if (!(alpha >= 0.0)) throw std::invalid_argument("field: alpha must be >= 0");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("field: γ ∈ (0, 1] required");
  if (!(force_max >= 0.0)) throw std::invalid_argument("field: force_max must be >= 0");
}

double FeedbackForce::norm() const { return std::hypot(forward, lateral); }

double reserve_time(double distance, double closing_speed) {
  if (closing_speed == 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  return distance / closing_speed;
}

double risk(double distance, double closing_speed, const FieldParams& params) {
  const double temporal = std::max(0.0, 1.0 / reserve_time(distance, closing_speed) - 1.0 / params.t_safe);
  const double spatial = std::max(0.0, 1.0 / distance - 1.0 / params.d_safe);
  return temporal + params.alpha * spatial;
}

double repulsion_from_risk(double risk_value, double gain) {
  return risk_value >= 1.0 / gain ? 1.0 : gain * risk_value;
}

double repulsion(double distance, double closing_speed, const FieldParams& params) {
  return repulsion_from_risk(risk(distance, closing_speed, params), params.gain);
}

double attn_repulsion(const sim::ObstacleObservation& obs, const memory::AttentivenessMap& map,
                      const FieldParams& params) {
  return repulsion(obs.distance, obs.closing_speed, params) * (1.0 - params.gamma * attentiveness_at(obs, map));
}

FeedbackForce total_repulsion(std::span<const sim::ObstacleObservation> observations,
                              const memory::AttentivenessMap& map, const FieldParams& params,
                              const sim::RobotState& robot) {
  return combine(observations, params, robot,
                 [&](const sim::ObstacleObservation& obs) { return attentiveness_at(obs, map); });
}

FeedbackForce gpf_baseline(std::span<const sim::ObstacleObservation> observations, const FieldParams& params,
                           const sim::RobotState& robot) {
  return combine(observations, params, robot, [](const sim::ObstacleObservation&) { return 0.0; });
}

}  // namespace ame::haptics
