#pragma once

#include <Eigen/Core>

#include "ame/sim/world.hpp"

namespace ame::sim {

/// World-to-camera rigid transform: p_cam = rotation * p_world + translation.
/// Camera axes follow the pinhole convention: x right, y down, z forward.
struct Extrinsics {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  [[nodiscard]] Eigen::Vector3d to_camera(const Eigen::Vector3d& world) const {
    return rotation * world + translation;
  }
  [[nodiscard]] Eigen::Vector3d to_world(const Eigen::Vector3d& cam) const {
    return rotation.transpose() * (cam - translation);
  }
  /// Camera center in world coordinates.
  [[nodiscard]] Eigen::Vector3d center() const { return -(rotation.transpose() * translation); }
};

struct Intrinsics {
  double fx = 120.0;
  double fy = 120.0;
  double cx = 80.0;
  double cy = 60.0;
  int width = 160;
  int height = 120;
  double z_near = 0.3;
  double z_far = 10.0;

  /// Defaults for an image size: f = 0.75 * width, principal point at the center.
  static Intrinsics for_size(int width, int height);
};

struct CameraModel {
  Intrinsics intrinsics;
  Extrinsics extrinsics;

  /// Throws std::invalid_argument on fx/fy <= 0, bad clip range, empty image,
  /// or a rotation that is not orthonormal within 1e-9.
  void validate() const;
};

/// Head camera mounting relative to the robot base.
struct CameraMount {
  double height = 1.0;      ///< lens height above the floor [m]
  double pitch_down = 0.35; ///< downward tilt [rad]
  double yaw_offset = 0.0;  ///< head yaw relative to the body heading [rad]
};

/// Extrinsics of a camera at (x, y, mount.height) looking along yaw theta + yaw_offset,
/// tilted down by mount.pitch_down. With zero yaw and pitch the optical axis is world +x.
[[nodiscard]] Extrinsics camera_pose(const RobotState& state, const CameraMount& mount);

[[nodiscard]] CameraModel make_camera(const Intrinsics& intrinsics, const RobotState& state,
                                      const CameraMount& mount);

}  // namespace ame::sim
