#include "ame/sim/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ame::sim {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMinHit = 1e-9;

enum class Face { None, Floor, Top, SideX, SideY };

struct Hit {
  double lambda = kInf;
  Face face = Face::None;
  const Box* box = nullptr;
};

Rgb scale(Rgb c, double k) {
  auto ch = [k](std::uint8_t x) { return static_cast<std::uint8_t>(std::lround(std::clamp(x * k, 0.0, 255.0))); };
  return {ch(c.r), ch(c.g), ch(c.b)};
}

Rgb blend(Rgb a, Rgb b, double t) {
  auto ch = [t](std::uint8_t x, std::uint8_t y) {
    return static_cast<std::uint8_t>(std::lround((1.0 - t) * x + t * y));
  };
  return {ch(a.r, b.r), ch(a.g, b.g), ch(a.b, b.b)};
}

constexpr Rgb kWorkingAreaTint{60, 90, 220};
constexpr Rgb kGoalTint{60, 200, 80};

// Slab test against the box [min_x,max_x] x [min_y,max_y] x [0,height].
void intersect_box(const Box& box, const Eigen::Vector3d& origin, const Eigen::Vector3d& dir, Hit& best) {
  const double lo[3] = {box.footprint.min_x, box.footprint.min_y, 0.0};
  const double hi[3] = {box.footprint.max_x, box.footprint.max_y, box.height};
  double t_enter = -kInf;
  double t_exit = kInf;
  int enter_axis = -1;
  for (int axis = 0; axis < 3; ++axis) {
    const double o = origin[axis];
    const double d = dir[axis];
    if (std::abs(d) < 1e-15) {
      if (o < lo[axis] || o > hi[axis]) {
        return;
      }
      continue;
    }
    double t0 = (lo[axis] - o) / d;
    double t1 = (hi[axis] - o) / d;
    if (t0 > t1) {
      std::swap(t0, t1);
    }
    if (t0 > t_enter) {
      t_enter = t0;
      enter_axis = axis;
    }
    t_exit = std::min(t_exit, t1);
    if (t_enter > t_exit) {
      return;
    }
  }
  if (t_enter < kMinHit || t_enter >= best.lambda) {
    return;
  }
  best.lambda = t_enter;
  best.box = &box;
  best.face = enter_axis == 0 ? Face::SideX : enter_axis == 1 ? Face::SideY : Face::Top;
}

Rgb floor_color_at(const World& world, double x, double y) {
  if (world.goal.contains(x, y)) {
    return blend(world.floor_color, kGoalTint, 0.6);
  }
  for (const auto& wa : world.working_areas) {
    if (wa.area.contains(x, y)) {
      return blend(world.floor_color, kWorkingAreaTint, 0.6);
    }
  }
  return world.floor_color;
}

}  // namespace

Eigen::Vector3d pixel_ray(const CameraModel& camera, double u, double v) {
  const auto& k = camera.intrinsics;
  const Eigen::Vector3d cam((u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0);
  return camera.extrinsics.rotation.transpose() * cam;
}

RgbdFrame render_rgbd(const World& world, const CameraModel& camera, std::int64_t tick) {
  const auto& k = camera.intrinsics;
  RgbdFrame frame{RgbImage(k.width, k.height, kSkyColor), DepthImage(k.width, k.height, k.z_far), camera, tick};

  const Eigen::Vector3d origin = camera.extrinsics.center();
  const Eigen::Matrix3d rt = camera.extrinsics.rotation.transpose();
  const Eigen::Vector3d col_x = rt.col(0) / k.fx;
  const Eigen::Vector3d col_y = rt.col(1) / k.fy;
  const Eigen::Vector3d col_z = rt.col(2);

  for (int v = 0; v < k.height; ++v) {
    const Eigen::Vector3d row_dir = col_z + (v - k.cy) * col_y;
    for (int u = 0; u < k.width; ++u) {
      const Eigen::Vector3d dir = row_dir + (u - k.cx) * col_x;
      Hit best;
      if (dir.z() < 0.0 && origin.z() > 0.0) {
        best.lambda = -origin.z() / dir.z();
        best.face = Face::Floor;
      }
      for (const auto& box : world.obstacles) {
        intersect_box(box, origin, dir, best);
      }
      if (best.face == Face::None) {
        continue;
      }
      // The ray direction has unit camera-z, so the ray parameter is the perpendicular depth.
      frame.depth(u, v) = std::clamp(best.lambda, k.z_near, k.z_far);
      switch (best.face) {
        case Face::Floor: {
          const Eigen::Vector3d p = origin + best.lambda * dir;
          frame.rgb(u, v) = floor_color_at(world, p.x(), p.y());
          break;
        }
        case Face::Top:
          frame.rgb(u, v) = best.box->color;
          break;
        case Face::SideX:
          frame.rgb(u, v) = scale(best.box->color, 0.85);
          break;
        case Face::SideY:
          frame.rgb(u, v) = scale(best.box->color, 0.7);
          break;
        case Face::None:
          break;
      }
    }
  }
  return frame;
}

}  // namespace ame::sim
