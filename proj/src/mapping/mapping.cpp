#include "ame/mapping/mapping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <spdlog/spdlog.h>

namespace ame::mapping {

GridSpec GridSpec::covering(const sim::Rect& bounds, double resolution) {
  if (!(resolution > 0.0)) {
    throw std::invalid_argument("grid: resolution must be > 0");
  }
  GridSpec g;
  g.resolution = resolution;
  g.origin_x = bounds.min_x;
  g.origin_y = bounds.min_y;
  // Small slack so bounds that are an exact multiple of the resolution do not gain a sliver column.
  g.width = std::max(1, static_cast<int>(std::ceil(bounds.width() / resolution - 1e-9)));
  g.height = std::max(1, static_cast<int>(std::ceil(bounds.height() / resolution - 1e-9)));
  return g;
}

void GridSpec::validate() const {
  if (!(resolution > 0.0)) {
    throw std::invalid_argument("grid: resolution must be > 0");
  }
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("grid: width and height must be positive");
  }
}

std::optional<CellIndex> GridSpec::cell_of(double x, double y) const {
  const double fi = std::floor((x - origin_x) / resolution);
  const double fj = std::floor((y - origin_y) / resolution);
  if (!(fi >= 0.0 && fj >= 0.0 && fi < width && fj < height)) {
    return std::nullopt;
  }
  return CellIndex{static_cast<int>(fi), static_cast<int>(fj)};
}

std::optional<double> TopDownSaliency::score(CellIndex c) const {
  if (!grid.contains(c)) {
    return std::nullopt;
  }
  const auto key = grid.linear(c);
  const auto it = std::lower_bound(cells.begin(), cells.end(), key,
                                   [&](const VisibleCell& cell, std::size_t k) { return grid.linear(cell.cell) < k; });
  if (it == cells.end() || it->cell != c) {
    return std::nullopt;
  }
  return it->score;
}

Eigen::Vector3d reproject_pixel(const sim::CameraModel& camera, double u, double v, double z) {
  const auto& k = camera.intrinsics;
  const Eigen::Vector3d cam(z * (u - k.cx) / k.fx, z * (v - k.cy) / k.fy, z);
  return camera.extrinsics.to_world(cam);
}

std::optional<PixelPoint> project_point(const sim::CameraModel& camera, const Eigen::Vector3d& world) {
  const Eigen::Vector3d cam = camera.extrinsics.to_camera(world);
  if (!(cam.z() > 0.0)) {
    return std::nullopt;
  }
  const auto& k = camera.intrinsics;
  return PixelPoint{k.fx * cam.x() / cam.z() + k.cx, k.fy * cam.y() / cam.z() + k.cy, cam.z()};
}

TopDownSaliency project_visible_cells(const sim::RgbdFrame& frame, const saliency::SaliencyImage& saliency,
                                      const GridSpec& grid, const ProjectionParams& params) {
  if (!frame.depth.same_shape(saliency.scores)) {
    throw std::invalid_argument("project_visible_cells: frame and saliency are not aligned");
  }
  if (params.stride < 1) {
    throw std::invalid_argument("project_visible_cells: stride must be >= 1");
  }
  grid.validate();

  constexpr double kUnseen = std::numeric_limits<double>::infinity();
  std::vector<double> minimum(grid.cell_count(), kUnseen);
  TopDownSaliency out;
  out.grid = grid;
  out.tick = frame.tick;

  const auto& k = frame.camera.intrinsics;
  const Eigen::Matrix3d rt = frame.camera.extrinsics.rotation.transpose();
  const Eigen::Vector3d center = frame.camera.extrinsics.center();
  for (int v = 0; v < frame.depth.height(); v += params.stride) {
    for (int u = 0; u < frame.depth.width(); u += params.stride) {
      const double z = frame.depth(u, v);
      if (!(z < k.z_far) || !std::isfinite(z)) {
        continue;
      }
      const Eigen::Vector3d cam(z * (u - k.cx) / k.fx, z * (v - k.cy) / k.fy, z);
      const Eigen::Vector3d p = rt * cam + center;
      if (p.z() > params.robot_height || p.z() < -params.ground_tolerance) {
        continue;
      }
      const auto cell = grid.cell_of(p.x(), p.y());
      if (!cell) {
        ++out.dropped_outside_grid;
        continue;
      }
      auto& slot = minimum[grid.linear(*cell)];
      slot = std::min(slot, saliency.scores(u, v));
    }
  }
  for (std::size_t idx = 0; idx < minimum.size(); ++idx) {
    if (minimum[idx] != kUnseen) {
      out.cells.push_back({grid.from_linear(idx), minimum[idx]});
    }
  }
  if (out.dropped_outside_grid > 0) {
    spdlog::trace("project_visible_cells: {} points outside grid", out.dropped_outside_grid);
  }
  return out;
}

Image<double> topdown_raster(const TopDownSaliency& topdown) {
  Image<double> out(topdown.grid.width, topdown.grid.height, -1.0);
  for (const auto& c : topdown.cells) {
    out(c.cell.i, topdown.grid.height - 1 - c.cell.j) = c.score;
  }
  return out;
}

}  // namespace ame::mapping
