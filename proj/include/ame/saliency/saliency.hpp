#pragma once

#include <cstdint>
#include <vector>

#include "ame/common/image.hpp"

namespace ame::saliency {

/// Per-pixel saliency on the [0, 255] scale, aligned to a frame.
struct SaliencyImage {
  Image<double> scores;
  std::int64_t tick = 0;
};

struct SaliencyParams {
  double k_image = 0.5;
  double k_depth = 0.5;
  int pyramid_levels = 9;
  std::vector<int> center_scales{2, 3, 4};
  std::vector<int> surround_deltas{3, 4};
  int orientation_count = 4;

  /// Throws std::invalid_argument on negative weights, k_image + k_depth == 0,
  /// too few pyramid levels for the configured scales, or orientation_count < 1.
  void validate() const;
};

/// Bottom-up image saliency (center-surround model over intensity, red-green /
/// blue-yellow opponency and even-symmetric oriented energy).
///
/// The pyramid holds `pyramid_levels` levels or as many as the image allows
/// (sizes floor-halve; a level needs at least one pixel). Center-surround pairs
/// whose surround level does not exist are skipped; if none remain the result is
/// all zero. Output is 255 * mean of the three normalized conspicuity maps,
/// bilinearly resampled to the input resolution.
[[nodiscard]] SaliencyImage image_saliency(const RgbImage& rgb, const SaliencyParams& params);

/// floor(255 * (z_near / z) * (z_far - z) / (z_far - z_near) + 0.5). Depths below
/// z_near are evaluated at z_near; depths above z_far at z_far.
[[nodiscard]] double depth_saliency_score(double z, double z_near, double z_far);

[[nodiscard]] SaliencyImage depth_saliency(const DepthImage& depth, double z_near, double z_far);

/// k_image * image + k_depth * depth, clamped to [0, 255]. Throws
/// std::invalid_argument if the two maps differ in size.
[[nodiscard]] SaliencyImage fuse_saliency(const SaliencyImage& image, const SaliencyImage& depth, double k_image,
                                          double k_depth);

namespace detail {

using Plane = Image<float>;

/// Blur with the 5-tap binomial kernel (mirror borders) then resample to
/// floor(size / 2) with pixel-center alignment.
[[nodiscard]] Plane pyr_down(const Plane& src);

/// Bilinear resample with pixel-center alignment, edge clamped.
[[nodiscard]] Plane resample(const Plane& src, int width, int height);

/// Max-normalization: scale to [0, 1], then multiply by (1 - mean of the other
/// local maxima)^2. A local maximum is a pixel no neighbour exceeds (plateaus
/// count once); only the strongest per block of a stride = width / 8 grid counts.
[[nodiscard]] Plane normalize_map(const Plane& map);

}  // namespace detail

}  // namespace ame::saliency
