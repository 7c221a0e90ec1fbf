#include "ame/memory/attention_memory.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace ame::memory {

using mapping::CellIndex;
using mapping::GridSpec;
using mapping::TopDownSaliency;

AttentivenessMap::AttentivenessMap(const GridSpec& grid) : grid_(grid) {
  grid.validate();
  values_.assign(grid.cell_count(), 0.0);
}

void AttentivenessMap::set(CellIndex c, double value) {
  if (!grid_.contains(c)) {
    throw std::out_of_range("attentiveness map: cell outside grid");
  }
  if (!(value >= 0.0 && value <= 1.0)) {
    throw std::invalid_argument("attentiveness map: value outside [0, 1]");
  }
  values_[grid_.linear(c)] = value;
}

std::optional<double> AttentivenessMap::lookup(double x, double y) const {
  const auto cell = grid_.cell_of(x, y);
  if (!cell) {
    return std::nullopt;
  }
  return at(*cell);
}

double AttentivenessMap::mean() const {
  if (values_.empty()) return 0.0;
  return std::accumulate(values_.begin(), values_.end(), 0.0) / static_cast<double>(values_.size());
}

double AttentivenessMap::max() const {
  return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
}

std::size_t AttentivenessMap::nonzero_count() const {
  return static_cast<std::size_t>(std::count_if(values_.begin(), values_.end(), [](double m) { return m > 0.0; }));
}

Image<double> AttentivenessMap::raster() const {
  Image<double> out(grid_.width, grid_.height);
  for (int j = 0; j < grid_.height; ++j) {
    for (int i = 0; i < grid_.width; ++i) {
      out(i, grid_.height - 1 - j) = at({i, j});
    }
  }
  return out;
}

void MemoryParams::validate() const {
  if (!(encoding_scale > 0.0 && encoding_scale <= 1.0)) {
    throw std::invalid_argument("memory: encoding scale r must satisfy 0 < r <= 1");
  }
  if (!(decay_rate >= 0.0 && decay_rate <= 1.0)) {
    throw std::invalid_argument("memory: decay rate D must satisfy 0 <= D <= 1");
  }
}

std::vector<CellRate> attention_rates(const TopDownSaliency& visible) {
  double total = 0.0;
  for (const auto& c : visible.cells) {
    total += c.score;
  }
  std::vector<CellRate> rates;
  rates.reserve(visible.cells.size());
  for (const auto& c : visible.cells) {
    rates.push_back({c.cell, total > 0.0 ? c.score / total : 0.0});
  }
  return rates;
}

AttentivenessMap encode(AttentivenessMap map, std::span<const CellRate> rates, double encoding_scale) {
  auto values = map.mutable_values();
  for (const auto& rate : rates) {
    if (!map.grid().contains(rate.cell)) {
      throw std::out_of_range("encode: cell outside grid");
    }
    double& m = values[map.grid().linear(rate.cell)];
    m = m + rate.rate * encoding_scale * (1.0 - m);
  }
  return map;
}

AttentivenessMap decay(AttentivenessMap map, const TopDownSaliency& visible, double decay_rate) {
  std::vector<bool> seen(map.grid().cell_count(), false);
  for (const auto& c : visible.cells) {
    if (map.grid().contains(c.cell)) {
      seen[map.grid().linear(c.cell)] = true;
    }
  }
  auto values = map.mutable_values();
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!seen[k]) {
      values[k] = (1.0 - decay_rate) * values[k];
    }
  }
  return map;
}

AttentivenessMap update(AttentivenessMap map, const TopDownSaliency& visible, const MemoryParams& params) {
  if (!(visible.grid == map.grid())) {
    throw std::invalid_argument("memory update: top-down saliency and map use different grids");
  }
  const auto rates = attention_rates(visible);
  map = decay(std::move(map), visible, params.decay_rate);
  map = encode(std::move(map), rates, params.encoding_scale);
  map.set_tick(visible.tick);
  return map;
}

double rescale_decay_rate(double decay_rate, double dt, double new_dt) {
  if (!(dt > 0.0 && new_dt > 0.0)) {
    throw std::invalid_argument("rescale_decay_rate: periods must be > 0");
  }
  return 1.0 - std::pow(1.0 - decay_rate, new_dt / dt);
}

namespace {

constexpr std::array<char, 4> kMagic = {'A', 'M', 'E', 'M'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& out, T value) {
  static_assert(std::endian::native == std::endian::little, "binary snapshot assumes a little-endian host");
  std::array<char, sizeof(T)> bytes{};
  std::memcpy(bytes.data(), &value, sizeof(T));
  out.write(bytes.data(), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  std::array<char, sizeof(T)> bytes{};
  if (!in.read(bytes.data(), sizeof(T))) {
    throw std::runtime_error("attentiveness snapshot: truncated");
  }
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

}  // namespace

void write_binary(std::ostream& out, const AttentivenessMap& map) {
  out.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(out, kVersion);
  const auto& g = map.grid();
  put<double>(out, g.resolution);
  put<double>(out, g.origin_x);
  put<double>(out, g.origin_y);
  put<std::int32_t>(out, g.width);
  put<std::int32_t>(out, g.height);
  put<std::int64_t>(out, map.tick());
  for (double m : map.values()) {
    put<float>(out, static_cast<float>(m));
  }
}

AttentivenessMap read_binary(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw std::runtime_error("attentiveness snapshot: bad magic");
  }
  if (get<std::uint32_t>(in) != kVersion) {
    throw std::runtime_error("attentiveness snapshot: unsupported version");
  }
  GridSpec g;
  g.resolution = get<double>(in);
  g.origin_x = get<double>(in);
  g.origin_y = get<double>(in);
  g.width = get<std::int32_t>(in);
  g.height = get<std::int32_t>(in);
  AttentivenessMap map(g);
  map.set_tick(get<std::int64_t>(in));
  for (double& m : map.mutable_values()) {
    m = static_cast<double>(get<float>(in));
  }
  return map;
}

}  // namespace ame::memory
