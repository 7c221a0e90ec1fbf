#pragma once

#include <span>
#include <vector>

#include "ame/memory/attention_memory.hpp"
#include "ame/sim/obstacles.hpp"
#include "ame/sim/world.hpp"

namespace ame::haptics {

struct FieldParams {
  double t_safe = 2.0;    ///< safe reserve time [s]
  double d_safe = 1.5;    ///< safe distance [m]
  double alpha = 1.0;     ///< weight of the distance term against the temporal term
  double gain = 2.0;      ///< G; repulsion saturates once risk >= 1 / G
  double gamma = 0.8;     ///< attentiveness modulation depth, (0, 1]
  double force_max = 10.0;  ///< force at full repulsion [N]

  void validate() const;
};

struct ObstacleRepulsion {
  int obstacle_id = 0;
  double distance = 0.0;
  double closing_speed = 0.0;
  double repulsion = 0.0;       ///< R, before modulation
  double attentiveness = 0.0;   ///< m at the obstacle point (0 for the baseline)
  double attn_repulsion = 0.0;  ///< R * (1 - gamma * m)
  double weight = 0.0;          ///< normalized share of the total

  friend bool operator==(const ObstacleRepulsion&, const ObstacleRepulsion&) = default;
};

/// Rendered feedback. `forward` / `lateral` are robot-frame components
/// (x ahead, y to the left) in newtons.
struct FeedbackForce {
  double magnitude = 0.0;  ///< R_total in [0, 1]
  double forward = 0.0;
  double lateral = 0.0;
  std::vector<ObstacleRepulsion> per_obstacle;

  [[nodiscard]] double norm() const;

  friend bool operator==(const FeedbackForce&, const FeedbackForce&) = default;
};

/// d / v; +infinity when v == 0.
[[nodiscard]] double reserve_time(double distance, double closing_speed);

/// max(0, 1/t_res - 1/t_safe) + alpha * max(0, 1/d - 1/d_safe).
[[nodiscard]] double risk(double distance, double closing_speed, const FieldParams& params);

/// 1 when risk >= 1/G, otherwise G * risk.
[[nodiscard]] double repulsion_from_risk(double risk_value, double gain);
[[nodiscard]] double repulsion(double distance, double closing_speed, const FieldParams& params);

/// R * (1 - gamma * m), m read from the cell holding the obstacle point (0 outside the map).
[[nodiscard]] double attn_repulsion(const sim::ObstacleObservation& obs, const memory::AttentivenessMap& map,
                                    const FieldParams& params);

/// Weighted total: w_i = R_attn,i / sum_j R_attn,j, R_total = sum_i w_i * R_attn,i.
/// The force points along the w-weighted mean of obstacle-to-robot unit
/// vectors (renormalized), scaled by force_max * R_total, in the robot frame.
[[nodiscard]] FeedbackForce total_repulsion(std::span<const sim::ObstacleObservation> observations,
                                            const memory::AttentivenessMap& map, const FieldParams& params,
                                            const sim::RobotState& robot);

/// Classical field: identical to total_repulsion with zero attentiveness everywhere.
[[nodiscard]] FeedbackForce gpf_baseline(std::span<const sim::ObstacleObservation> observations,
                                         const FieldParams& params, const sim::RobotState& robot);

}  // namespace ame::haptics
