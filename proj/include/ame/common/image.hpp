#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace ame {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Row-major 2-D raster. Pixel (u, v) is column u, row v.
template <typename T>
class Image {
 public:
  Image() = default;

  Image(int width, int height, T fill = T{}) : width_(width), height_(height) {
    if (width < 0 || height < 0) {
      throw std::invalid_argument("Image: negative dimensions");
    }
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }

  [[nodiscard]] int width() const { return width_; }
  [[nodiscard]] int height() const { return height_; }
  [[nodiscard]] bool empty() const { return data_.empty(); }
  [[nodiscard]] std::size_t size() const { return data_.size(); }

  [[nodiscard]] T& operator()(int u, int v) { return data_[index(u, v)]; }
  [[nodiscard]] const T& operator()(int u, int v) const { return data_[index(u, v)]; }

  [[nodiscard]] T& at(int u, int v) {
    check(u, v);
    return data_[index(u, v)];
  }
  [[nodiscard]] const T& at(int u, int v) const {
    check(u, v);
    return data_[index(u, v)];
  }

  [[nodiscard]] std::span<T> pixels() { return data_; }
  [[nodiscard]] std::span<const T> pixels() const { return data_; }

  template <typename U>
  [[nodiscard]] bool same_shape(const Image<U>& other) const {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  [[nodiscard]] std::size_t index(int u, int v) const {
    return static_cast<std::size_t>(v) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(u);
  }
  void check(int u, int v) const {
    if (u < 0 || v < 0 || u >= width_ || v >= height_) {
      throw std::out_of_range("Image: pixel out of range");
    }
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using RgbImage = Image<Rgb>;
using DepthImage = Image<double>;
using GrayImage = Image<std::uint8_t>;

}  // namespace ame
