#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "ame/mapping/mapping.hpp"

namespace ame::memory {

/// Planar grid of attentiveness values in [0, 1], one per cell of a GridSpec.
class AttentivenessMap {
 public:
  AttentivenessMap() = default;
  explicit AttentivenessMap(const mapping::GridSpec& grid);

  [[nodiscard]] const mapping::GridSpec& grid() const { return grid_; }
  [[nodiscard]] std::int64_t tick() const { return tick_; }
  void set_tick(std::int64_t tick) { tick_ = tick; }

  [[nodiscard]] double at(mapping::CellIndex c) const { return values_[grid_.linear(c)]; }
  /// Throws std::out_of_range outside the grid or std::invalid_argument outside [0, 1].
  void set(mapping::CellIndex c, double value);

  /// Attentiveness of the cell containing (x, y); empty when outside the grid.
  [[nodiscard]] std::optional<double> lookup(double x, double y) const;

  [[nodiscard]] std::span<const double> values() const { return values_; }
  [[nodiscard]] std::span<double> mutable_values() { return values_; }

  [[nodiscard]] double mean() const;
  [[nodiscard]] double max() const;
  [[nodiscard]] std::size_t nonzero_count() const;

  /// Image of the map, row 0 = highest y, for heatmap dumps.
  [[nodiscard]] Image<double> raster() const;

  friend bool operator==(const AttentivenessMap&, const AttentivenessMap&) = default;

 private:
  mapping::GridSpec grid_;
  std::vector<double> values_;
  std::int64_t tick_ = 0;
};

/// Per-tick encoding scale r and decay rate D. Both are tied to the tick period;
/// see rescale_decay_rate when changing the tick rate.
struct MemoryParams {
  double encoding_scale = 0.4;
  double decay_rate = 0.01;

  /// Requires 0 < r <= 1 and 0 <= D <= 1.
  void validate() const;
};

struct CellRate {
  mapping::CellIndex cell;
  double rate = 0.0;

  friend bool operator==(const CellRate&, const CellRate&) = default;
};

/// c = s / sum(s) over the visible cells; all zero when the sum is zero.
[[nodiscard]] std::vector<CellRate> attention_rates(const mapping::TopDownSaliency& visible);

/// m <- m + c * r * (1 - m) on the given cells; every other cell is untouched.
[[nodiscard]] AttentivenessMap encode(AttentivenessMap map, std::span<const CellRate> rates, double encoding_scale);

/// m <- (1 - D) * m on every cell not in `visible`.
[[nodiscard]] AttentivenessMap decay(AttentivenessMap map, const mapping::TopDownSaliency& visible, double decay_rate);

/// One memory tick: encode visible cells, decay the rest. Throws
/// std::invalid_argument when the grids differ.
[[nodiscard]] AttentivenessMap update(AttentivenessMap map, const mapping::TopDownSaliency& visible,
                                      const MemoryParams& params);

/// Per-tick decay rate that matches `decay_rate` (defined at period `dt`) when ticking at `new_dt`.
[[nodiscard]] double rescale_decay_rate(double decay_rate, double dt, double new_dt);

/// Binary snapshot: "AMEM" magic, u32 version, f64 resolution, f64 origin x/y,
/// i32 width/height, i64 tick, then width*height little-endian f32 in row-major
/// (row j = y index) order.
void write_binary(std::ostream& out, const AttentivenessMap& map);
[[nodiscard]] AttentivenessMap read_binary(std::istream& in);

}  // namespace ame::memory
