#include "ame/saliency/saliency.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <spdlog/spdlog.h>

namespace ame::saliency {

using detail::Plane;

namespace {

// Raw feature maps whose peak is below this (0-255 units) are treated as flat.
constexpr float kFlatFeature = 1e-3f;

int reflect(int i, int n) {
  if (n == 1) {
    return 0;
  }
  while (i < 0 || i >= n) {
    i = i < 0 ? -i : 2 * (n - 1) - i;
  }
  return i;
}

Plane blur5(const Plane& src) {
  static constexpr float kTaps[5] = {1.f / 16, 4.f / 16, 6.f / 16, 4.f / 16, 1.f / 16};
  const int w = src.width();
  const int h = src.height();
  Plane tmp(w, h);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      float acc = 0.f;
      for (int k = -2; k <= 2; ++k) {
        acc += kTaps[k + 2] * src(reflect(u + k, w), v);
      }
      tmp(u, v) = acc;
    }
  }
  Plane out(w, h);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      float acc = 0.f;
      for (int k = -2; k <= 2; ++k) {
        acc += kTaps[k + 2] * tmp(u, reflect(v + k, h));
      }
      out(u, v) = acc;
    }
  }
  return out;
}

float max_value(const Plane& p) {
  float m = 0.f;
  for (float x : p.pixels()) {
    m = std::max(m, x);
  }
  return m;
}

// No neighbour exceeds x and no earlier neighbour (raster order) equals it, so a
// plateau counts once.
bool is_local_max(const Plane& map, int u, int v) {
  const float x = map(u, v);
  for (int dv = -1; dv <= 1; ++dv) {
    for (int du = -1; du <= 1; ++du) {
      const int nu = u + du;
      const int nv = v + dv;
      if ((du == 0 && dv == 0) || nu < 0 || nv < 0 || nu >= map.width() || nv >= map.height()) {
        continue;
      }
      const float n = map(nu, nv);
      const bool earlier = dv < 0 || (dv == 0 && du < 0);
      if (n > x || (earlier && n == x)) {
        return false;
      }
    }
  }
  return true;
}

Plane abs_diff(const Plane& a, const Plane& b) {
  Plane out(a.width(), a.height());
  auto pa = a.pixels();
  auto pb = b.pixels();
  auto po = out.pixels();
  for (std::size_t k = 0; k < po.size(); ++k) {
    po[k] = std::abs(pa[k] - pb[k]);
  }
  return out;
}

void accumulate(Plane& acc, const Plane& add) {
  auto pa = acc.pixels();
  auto pb = add.pixels();
  for (std::size_t k = 0; k < pa.size(); ++k) {
    pa[k] += pb[k];
  }
}

std::vector<Plane> build_pyramid(Plane base, int max_levels) {
  std::vector<Plane> levels;
  levels.push_back(std::move(base));
  while (static_cast<int>(levels.size()) < max_levels && levels.back().width() >= 2 && levels.back().height() >= 2) {
    levels.push_back(detail::pyr_down(levels.back()));
  }
  return levels;
}

// Oriented energy |c^2 Iuu + 2 c s Iuv + s^2 Ivv| of the second-derivative
// steerable basis ([1 -2 1] along, [1 2 1]/4 across; [-1 0 1]/2 in both for
// Iuv). Even-symmetric, so thin bars and small blobs respond at their center.
Plane orientation_energy(const Plane& intensity, double angle) {
  const int w = intensity.width();
  const int h = intensity.height();
  const auto c = static_cast<float>(std::cos(angle));
  const auto s = static_cast<float>(std::sin(angle));
  Plane out(w, h);
  for (int v = 0; v < h; ++v) {
    const int vm = reflect(v - 1, h);
    const int vp = reflect(v + 1, h);
    for (int u = 0; u < w; ++u) {
      const int um = reflect(u - 1, w);
      const int up = reflect(u + 1, w);
      auto uu = [&](int row) { return intensity(um, row) - 2.f * intensity(u, row) + intensity(up, row); };
      auto vv = [&](int col) { return intensity(col, vm) - 2.f * intensity(col, v) + intensity(col, vp); };
      const float iuu = 0.25f * (uu(vm) + 2.f * uu(v) + uu(vp));
      const float ivv = 0.25f * (vv(um) + 2.f * vv(u) + vv(up));
      const float iuv =
          0.25f * ((intensity(up, vp) - intensity(um, vp)) - (intensity(up, vm) - intensity(um, vm)));
      out(u, v) = std::abs(c * c * iuu + 2.f * c * s * iuv + s * s * ivv);
    }
  }
  return out;
}

struct ScalePair {
  int center;
  int surround;
};

// Sum over scale pairs of N(|X(c) - X(s)|), accumulated at `base` resolution.
Plane across_scale(const std::vector<Plane>& pyramid, const std::vector<ScalePair>& pairs, int base_w, int base_h) {
  Plane acc(base_w, base_h, 0.f);
  for (const auto& pair : pairs) {
    const Plane& center = pyramid[static_cast<std::size_t>(pair.center)];
    const Plane surround = detail::resample(pyramid[static_cast<std::size_t>(pair.surround)], center.width(),
                                            center.height());
    Plane feature = abs_diff(center, surround);
    if (max_value(feature) < kFlatFeature) {
      continue;
    }
    accumulate(acc, detail::resample(detail::normalize_map(feature), base_w, base_h));
  }
  return acc;
}

}  // namespace

namespace detail {

Plane pyr_down(const Plane& src) {
  const int w = src.width() / 2;
  const int h = src.height() / 2;
  if (w < 1 || h < 1) {
    throw std::invalid_argument("pyr_down: image too small");
  }
  return resample(blur5(src), w, h);
}

Plane resample(const Plane& src, int width, int height) {
  if (src.width() == width && src.height() == height) {
    return src;
  }
  const double sx = static_cast<double>(src.width()) / width;
  const double sy = static_cast<double>(src.height()) / height;
  std::vector<int> x0(static_cast<std::size_t>(width));
  std::vector<int> x1(static_cast<std::size_t>(width));
  std::vector<float> fx(static_cast<std::size_t>(width));
  for (int u = 0; u < width; ++u) {
    const double x = std::clamp((u + 0.5) * sx - 0.5, 0.0, static_cast<double>(src.width() - 1));
    const auto k = static_cast<std::size_t>(u);
    x0[k] = static_cast<int>(std::floor(x));
    x1[k] = std::min(x0[k] + 1, src.width() - 1);
    fx[k] = static_cast<float>(x - x0[k]);
  }
  Plane out(width, height);
  for (int v = 0; v < height; ++v) {
    const double y = std::clamp((v + 0.5) * sy - 0.5, 0.0, static_cast<double>(src.height() - 1));
    const int y0 = static_cast<int>(std::floor(y));
    const int y1 = std::min(y0 + 1, src.height() - 1);
    const auto fy = static_cast<float>(y - y0);
    for (int u = 0; u < width; ++u) {
      const auto k = static_cast<std::size_t>(u);
      const float top = src(x0[k], y0) + fx[k] * (src(x1[k], y0) - src(x0[k], y0));
      const float bottom = src(x0[k], y1) + fx[k] * (src(x1[k], y1) - src(x0[k], y1));
      out(u, v) = top + fy * (bottom - top);
    }
  }
  return out;
}

Plane normalize_map(const Plane& map) {
  Plane out(map.width(), map.height(), 0.f);
  const float peak = max_value(map);
  if (!(peak > 1e-9f)) {
    return out;
  }
  const int stride = std::max(1, map.width() / 8);
  const int blocks_x = (map.width() + stride - 1) / stride;
  const int blocks_y = (map.height() + stride - 1) / stride;
  std::vector<float> block_max(static_cast<std::size_t>(blocks_x * blocks_y), 0.f);
  for (int v = 0; v < map.height(); ++v) {
    for (int u = 0; u < map.width(); ++u) {
      if (!is_local_max(map, u, v)) {
        continue;
      }
      auto& m = block_max[static_cast<std::size_t>((v / stride) * blocks_x + u / stride)];
      m = std::max(m, map(u, v) / peak);
    }
  }
  // Local maxima below 10% of the peak do not compete; the peak's own block is excluded once.
  double sum = 0.0;
  int count = 0;
  bool skipped_peak = false;
  for (float m : block_max) {
    if (!skipped_peak && m >= 1.f) {
      skipped_peak = true;
      continue;
    }
    if (m >= 0.1f) {
      sum += m;
      ++count;
    }
  }
  const double mean = count > 0 ? sum / count : 0.0;
  const auto gain = static_cast<float>((1.0 - mean) * (1.0 - mean)) / peak;
  auto src = map.pixels();
  auto dst = out.pixels();
  for (std::size_t k = 0; k < dst.size(); ++k) {
    dst[k] = src[k] * gain;
  }
  return out;
}

}  // namespace detail

void SaliencyParams::validate() const {
  if (!(k_image >= 0.0 && k_depth >= 0.0 && k_image + k_depth > 0.0)) {
    throw std::invalid_argument("saliency: require k_image, k_depth >= 0 and k_image + k_depth > 0");
  }
  if (center_scales.empty() || surround_deltas.empty()) {
    throw std::invalid_argument("saliency: center_scales and surround_deltas must be non-empty");
  }
  for (int c : center_scales) {
    if (c < 0) throw std::invalid_argument("saliency: center scales must be >= 0");
  }
  for (int d : surround_deltas) {
    if (d < 1) throw std::invalid_argument("saliency: surround deltas must be >= 1");
  }
  const int needed = *std::max_element(center_scales.begin(), center_scales.end()) +
                     *std::max_element(surround_deltas.begin(), surround_deltas.end()) + 1;
  if (pyramid_levels < needed) {
    throw std::invalid_argument("saliency: pyramid_levels must be >= max(c) + max(delta) + 1");
  }
  if (orientation_count < 1) {
    throw std::invalid_argument("saliency: orientation_count must be >= 1");
  }
}

SaliencyImage image_saliency(const RgbImage& rgb, const SaliencyParams& params) {
  if (rgb.empty()) {
    throw std::invalid_argument("image_saliency: empty image");
  }
  const int w = rgb.width();
  const int h = rgb.height();
  SaliencyImage result{Image<double>(w, h, 0.0), 0};

  Plane intensity(w, h);
  float max_intensity = 0.f;
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const Rgb p = rgb(u, v);
      const float i = (static_cast<float>(p.r) + p.g + p.b) / 3.f;
      intensity(u, v) = i;
      max_intensity = std::max(max_intensity, i);
    }
  }

  // Broadly tuned opponency on hue normalized by intensity; dim pixels carry no hue.
  Plane red_green(w, h, 0.f);
  Plane blue_yellow(w, h, 0.f);
  constexpr float kHueScale = 255.f / 3.f;
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const float i = intensity(u, v);
      if (!(i > 0.1f * max_intensity) || i <= 0.f) {
        continue;
      }
      const Rgb p = rgb(u, v);
      const float r = p.r / i;
      const float g = p.g / i;
      const float b = p.b / i;
      const float R = std::max(0.f, r - 0.5f * (g + b));
      const float G = std::max(0.f, g - 0.5f * (r + b));
      const float B = std::max(0.f, b - 0.5f * (r + g));
      const float Y = std::max(0.f, 0.5f * (r + g) - 0.5f * std::abs(r - g) - b);
      red_green(u, v) = kHueScale * (R - G);
      blue_yellow(u, v) = kHueScale * (B - Y);
    }
  }

  const auto intensity_pyr = build_pyramid(std::move(intensity), params.pyramid_levels);
  const int levels = static_cast<int>(intensity_pyr.size());

  std::vector<ScalePair> pairs;
  int base_level = levels;
  for (int c : params.center_scales) {
    for (int delta : params.surround_deltas) {
      if (c + delta < levels) {
        pairs.push_back({c, c + delta});
        base_level = std::min(base_level, c);
      }
    }
  }
  if (pairs.empty()) {
    spdlog::debug("image_saliency: {}x{} image too small for any center-surround pair", w, h);
    return result;
  }
  const int base_w = intensity_pyr[static_cast<std::size_t>(base_level)].width();
  const int base_h = intensity_pyr[static_cast<std::size_t>(base_level)].height();

  const Plane intensity_map = across_scale(intensity_pyr, pairs, base_w, base_h);

  Plane color_map = across_scale(build_pyramid(std::move(red_green), levels), pairs, base_w, base_h);
  accumulate(color_map, across_scale(build_pyramid(std::move(blue_yellow), levels), pairs, base_w, base_h));

  Plane orientation_map(base_w, base_h, 0.f);
  for (int k = 0; k < params.orientation_count; ++k) {
    const double angle = std::numbers::pi * k / params.orientation_count;
    std::vector<Plane> oriented;
    oriented.reserve(intensity_pyr.size());
    for (const auto& level : intensity_pyr) {
      oriented.push_back(orientation_energy(level, angle));
    }
    accumulate(orientation_map, detail::normalize_map(across_scale(oriented, pairs, base_w, base_h)));
  }

  Plane combined(base_w, base_h, 0.f);
  accumulate(combined, detail::normalize_map(intensity_map));
  accumulate(combined, detail::normalize_map(color_map));
  accumulate(combined, detail::normalize_map(orientation_map));

  const Plane full = detail::resample(combined, w, h);
  auto src = full.pixels();
  auto dst = result.scores.pixels();
  for (std::size_t k = 0; k < dst.size(); ++k) {
    dst[k] = std::clamp(255.0 * static_cast<double>(src[k]) / 3.0, 0.0, 255.0);
  }
  return result;
}

double depth_saliency_score(double z, double z_near, double z_far) {
  const double depth = std::clamp(z, z_near, z_far);
  return std::floor(255.0 * (z_near / depth) * ((z_far - depth) / (z_far - z_near)) + 0.5);
}

SaliencyImage depth_saliency(const DepthImage& depth, double z_near, double z_far) {
  if (!(z_near > 0.0 && z_near < z_far)) {
    throw std::invalid_argument("depth_saliency: require 0 < z_near < z_far");
  }
  SaliencyImage out{Image<double>(depth.width(), depth.height()), 0};
  auto src = depth.pixels();
  auto dst = out.scores.pixels();
  std::size_t clamped = 0;
  for (std::size_t k = 0; k < src.size(); ++k) {
    if (src[k] < z_near) {
      ++clamped;
    }
    dst[k] = depth_saliency_score(src[k], z_near, z_far);
  }
  if (clamped > 0) {
    spdlog::debug("depth_saliency: {} pixels below z_near clamped", clamped);
  }
  return out;
}

SaliencyImage fuse_saliency(const SaliencyImage& image, const SaliencyImage& depth, double k_image, double k_depth) {
  if (!image.scores.same_shape(depth.scores)) {
    throw std::invalid_argument("fuse_saliency: saliency maps differ in size");
  }
  SaliencyImage out{Image<double>(image.scores.width(), image.scores.height()), image.tick};
  auto a = image.scores.pixels();
  auto b = depth.scores.pixels();
  auto dst = out.scores.pixels();
  for (std::size_t k = 0; k < dst.size(); ++k) {
    dst[k] = std::clamp(k_image * a[k] + k_depth * b[k], 0.0, 255.0);
  }
  return out;
}

}  // namespace ame::saliency
