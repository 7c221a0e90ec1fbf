#include "ame/sim/camera.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <stdexcept>

namespace ame::sim {

Intrinsics Intrinsics::for_size(int width, int height) {
  Intrinsics out;
  out.width = width;
  out.height = height;
  out.fx = 0.75 * width;
  out.fy = 0.75 * width;
  out.cx = 0.5 * width;
  out.cy = 0.5 * height;
  return out;
}

void CameraModel::validate() const {
  const auto& k = intrinsics;
  if (!(k.fx > 0.0 && k.fy > 0.0)) {
    throw std::invalid_argument("camera: fx, fy must be > 0");
  }
  if (!(k.z_near > 0.0 && k.z_near < k.z_far)) {
    throw std::invalid_argument("camera: require 0 < z_near < z_far");
  }
  if (k.width <= 0 || k.height <= 0) {
    throw std::invalid_argument("camera: image size must be positive");
  }
  const Eigen::Matrix3d gram = extrinsics.rotation.transpose() * extrinsics.rotation;
  if ((gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-9) {
    throw std::invalid_argument("camera: rotation is not orthonormal");
  }
}

Extrinsics camera_pose(const RobotState& state, const CameraMount& mount) {
  const double yaw = state.theta + mount.yaw_offset;
  const double cy = std::cos(yaw);
  const double sy = std::sin(yaw);
  const double cp = std::cos(mount.pitch_down);
  const double sp = std::sin(mount.pitch_down);

  // Camera axes expressed in world coordinates.
  const Eigen::Vector3d forward(cp * cy, cp * sy, -sp);
  const Eigen::Vector3d right(sy, -cy, 0.0);
  const Eigen::Vector3d down = forward.cross(right);

  Extrinsics out;
  out.rotation.row(0) = right.transpose();
  out.rotation.row(1) = down.transpose();
  out.rotation.row(2) = forward.transpose();
  const Eigen::Vector3d center(state.x, state.y, mount.height);
  out.translation = -(out.rotation * center);
  return out;
}

CameraModel make_camera(const Intrinsics& intrinsics, const RobotState& state, const CameraMount& mount) {
  return CameraModel{intrinsics, camera_pose(state, mount)};
}

}  // namespace ame::sim
