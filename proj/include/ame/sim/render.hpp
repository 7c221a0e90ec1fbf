#pragma once

#include <cstdint>

#include "ame/common/image.hpp"
#include "ame/sim/camera.hpp"
#include "ame/sim/world.hpp"

namespace ame::sim {

/// One synchronized color + depth capture.
///
/// Depth is the camera-z (perpendicular) distance of the nearest hit, clipped to
/// [z_near, z_far]. Pixels whose ray hits nothing carry z_far as a sentinel.
struct RgbdFrame {
  RgbImage rgb;
  DepthImage depth;
  CameraModel camera;
  std::int64_t tick = 0;
};

/// Color of pixels whose ray leaves the scene.
inline constexpr Rgb kSkyColor{185, 200, 215};

/// Per-pixel ray cast against the floor plane and every obstacle box. Pure and
/// reentrant. Working areas and the goal region are drawn as tinted floor.
[[nodiscard]] RgbdFrame render_rgbd(const World& world, const CameraModel& camera, std::int64_t tick = 0);

/// Direction (world frame, camera-z component of 1 in camera frame) of the ray through pixel (u, v).
[[nodiscard]] Eigen::Vector3d pixel_ray(const CameraModel& camera, double u, double v);

}  // namespace ame::sim
