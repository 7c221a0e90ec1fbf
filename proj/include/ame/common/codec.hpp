#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ame/common/image.hpp"

namespace ame {

/// PNG encoding (libpng). Gray images are 8-bit single channel.
std::vector<std::uint8_t> encode_png(const RgbImage& image);
std::vector<std::uint8_t> encode_png(const GrayImage& image);
void write_png(const std::filesystem::path& path, const RgbImage& image);
void write_png(const std::filesystem::path& path, const GrayImage& image);

/// Decodes 8-bit gray or RGB PNG data; gray is expanded to RGB.
RgbImage decode_png(std::span<const std::uint8_t> data);
RgbImage read_png(const std::filesystem::path& path);

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

/// Lower-case hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

/// Maps values in [lo, hi] linearly to 0..255 (clamped).
GrayImage to_gray(const Image<double>& values, double lo, double hi);

/// Black-red-yellow-white ramp over [0, 1], used for heatmaps.
RgbImage heatmap(const Image<double>& values, double lo, double hi);

}  // namespace ame
