#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "ame/saliency/saliency.hpp"
#include "ame/sim/camera.hpp"
#include "ame/sim/render.hpp"
#include "ame/sim/world.hpp"

namespace ame::mapping {

inline constexpr double kDefaultResolution = 0.25;
inline constexpr double kDefaultGroundTolerance = 0.05;
inline constexpr int kDefaultStride = 2;

/// Column i (x), row j (y).
struct CellIndex {
  int i = 0;
  int j = 0;

  friend auto operator<=>(const CellIndex&, const CellIndex&) = default;
};

/// Planar grid: cell (i, j) covers [origin_x + i*res, origin_x + (i+1)*res) x [origin_y + j*res, ...).
struct GridSpec {
  double resolution = kDefaultResolution;
  double origin_x = 0.0;
  double origin_y = 0.0;
  int width = 0;
  int height = 0;

  /// Smallest grid anchored at the bounds' min corner that covers them.
  static GridSpec covering(const sim::Rect& bounds, double resolution);

  void validate() const;

  [[nodiscard]] std::size_t cell_count() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  [[nodiscard]] bool contains(CellIndex c) const { return c.i >= 0 && c.j >= 0 && c.i < width && c.j < height; }
  [[nodiscard]] std::size_t linear(CellIndex c) const {
    return static_cast<std::size_t>(c.j) * static_cast<std::size_t>(width) + static_cast<std::size_t>(c.i);
  }
  [[nodiscard]] CellIndex from_linear(std::size_t k) const {
    return {static_cast<int>(k % static_cast<std::size_t>(width)), static_cast<int>(k / static_cast<std::size_t>(width))};
  }
  /// Cell containing (x, y): floor((p - origin) / resolution). Empty when outside the grid.
  [[nodiscard]] std::optional<CellIndex> cell_of(double x, double y) const;
  [[nodiscard]] sim::Vec2 cell_center(CellIndex c) const {
    return {origin_x + (c.i + 0.5) * resolution, origin_y + (c.j + 0.5) * resolution};
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

struct VisibleCell {
  CellIndex cell;
  double score = 0.0;

  friend bool operator==(const VisibleCell&, const VisibleCell&) = default;
};

/// Visible cells P_v with their top-down saliency S_v, sorted by linear index.
struct TopDownSaliency {
  GridSpec grid;
  std::vector<VisibleCell> cells;
  std::int64_t tick = 0;
  std::size_t dropped_outside_grid = 0;

  [[nodiscard]] std::optional<double> score(CellIndex c) const;
  [[nodiscard]] bool contains(CellIndex c) const { return score(c).has_value(); }
};

struct PixelPoint {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;  ///< camera-z
};

/// Pinhole reprojection of pixel (u, v) at camera depth z into the world frame.
[[nodiscard]] Eigen::Vector3d reproject_pixel(const sim::CameraModel& camera, double u, double v, double z);

/// Forward projection of a world point; empty when the point is not in front of the camera.
[[nodiscard]] std::optional<PixelPoint> project_point(const sim::CameraModel& camera, const Eigen::Vector3d& world);

struct ProjectionParams {
  double robot_height = 1.2;
  int stride = kDefaultStride;
  double ground_tolerance = kDefaultGroundTolerance;
};

/// Reprojects every stride-th pixel with a valid return (depth < z_far), keeps
/// points with height in [-ground_tolerance, robot_height], bins them into grid
/// cells and keeps each cell's minimum saliency. Points outside the grid are
/// counted in `dropped_outside_grid`.
[[nodiscard]] TopDownSaliency project_visible_cells(const sim::RgbdFrame& frame, const saliency::SaliencyImage& saliency,
                                                    const GridSpec& grid, const ProjectionParams& params);

/// Cell-aligned raster of a top-down map, image row 0 = highest y (unseen cells = -1).
[[nodiscard]] Image<double> topdown_raster(const TopDownSaliency& topdown);

}  // namespace ame::mapping
