#include "ame/common/codec.hpp"

#include <openssl/evp.h>
#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>

namespace ame {
namespace {

struct PngWriteBuffer {
  std::vector<std::uint8_t>* out;
};

void png_write_to_vector(png_structp png, png_bytep data, png_size_t length) {
  auto* buffer = static_cast<PngWriteBuffer*>(png_get_io_ptr(png));
  buffer->out->insert(buffer->out->end(), data, data + length);
}

void png_flush_noop(png_structp) {}

std::vector<std::uint8_t> encode_rows(int width, int height, int color_type, int channels,
                                      const std::uint8_t* pixels) {
  std::vector<std::uint8_t> out;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (png == nullptr) {
    throw std::runtime_error("png: cannot create write struct");
  }
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("png: cannot create info struct");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("png: encoding failed");
  }
  PngWriteBuffer buffer{&out};
  png_set_write_fn(png, &buffer, png_write_to_vector, png_flush_noop);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 3);
  png_write_info(png, info);
  const auto stride = static_cast<std::size_t>(width) * static_cast<std::size_t>(channels);
  for (int v = 0; v < height; ++v) {
    png_write_row(png, const_cast<png_bytep>(pixels + stride * static_cast<std::size_t>(v)));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream file(path, std::ios::binary);
  if (!file) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  file.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

struct PngReadBuffer {
  std::span<const std::uint8_t> data;
  std::size_t offset = 0;
};

void png_read_from_span(png_structp png, png_bytep out, png_size_t length) {
  auto* buffer = static_cast<PngReadBuffer*>(png_get_io_ptr(png));
  if (buffer->offset + length > buffer->data.size()) {
    png_error(png, "truncated data");
  }
  std::memcpy(out, buffer->data.data() + buffer->offset, length);
  buffer->offset += length;
}

}  // namespace

std::vector<std::uint8_t> encode_png(const RgbImage& image) {
  static_assert(sizeof(Rgb) == 3);
  return encode_rows(image.width(), image.height(), PNG_COLOR_TYPE_RGB, 3,
                     reinterpret_cast<const std::uint8_t*>(image.pixels().data()));
}

std::vector<std::uint8_t> encode_png(const GrayImage& image) {
  return encode_rows(image.width(), image.height(), PNG_COLOR_TYPE_GRAY, 1, image.pixels().data());
}

void write_png(const std::filesystem::path& path, const RgbImage& image) { write_bytes(path, encode_png(image)); }

void write_png(const std::filesystem::path& path, const GrayImage& image) { write_bytes(path, encode_png(image)); }

RgbImage decode_png(std::span<const std::uint8_t> data) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (png == nullptr) {
    throw std::runtime_error("png: cannot create read struct");
  }
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw std::runtime_error("png: cannot create info struct");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("png: decoding failed");
  }
  PngReadBuffer buffer{data, 0};
  png_set_read_fn(png, &buffer, png_read_from_span);
  png_read_info(png, info);
  const int width = static_cast<int>(png_get_image_width(png, info));
  const int height = static_cast<int>(png_get_image_height(png, info));
  const int color_type = png_get_color_type(png, info);
  if (png_get_bit_depth(png, info) != 8 || (color_type != PNG_COLOR_TYPE_RGB && color_type != PNG_COLOR_TYPE_GRAY)) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("png: only 8-bit gray or RGB supported");
  }
  const int channels = color_type == PNG_COLOR_TYPE_RGB ? 3 : 1;
  std::vector<std::uint8_t> row(static_cast<std::size_t>(width) * static_cast<std::size_t>(channels));
  RgbImage image(width, height);
  for (int v = 0; v < height; ++v) {
    png_read_row(png, row.data(), nullptr);
    for (int u = 0; u < width; ++u) {
      const auto* p = row.data() + static_cast<std::size_t>(u) * static_cast<std::size_t>(channels);
      image(u, v) = channels == 3 ? Rgb{p[0], p[1], p[2]} : Rgb{p[0], p[0], p[0]};
    }
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return image;
}

RgbImage read_png(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) {
    throw std::runtime_error("cannot open " + path.string());
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
  return decode_png(bytes);
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int written = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                      static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(written));
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) {
    throw std::invalid_argument("base64: length is not a multiple of 4");
  }
  std::vector<std::uint8_t> out(3 * (text.size() / 4));
  const int written = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                      static_cast<int>(text.size()));
  if (written < 0) {
    throw std::invalid_argument("base64: invalid input");
  }
  // EVP_DecodeBlock keeps the zero bytes produced by '=' padding.
  std::size_t padding = 0;
  if (!text.empty() && text.back() == '=') ++padding;
  if (text.size() > 1 && text[text.size() - 2] == '=') ++padding;
  out.resize(static_cast<std::size_t>(written) - padding);
  return out;
}

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256: digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0x0f]);
  }
  return out;
}

GrayImage to_gray(const Image<double>& values, double lo, double hi) {
  GrayImage out(values.width(), values.height());
  const double span = hi > lo ? hi - lo : 1.0;
  auto src = values.pixels();
  auto dst = out.pixels();
  for (std::size_t k = 0; k < src.size(); ++k) {
    const double t = std::clamp((src[k] - lo) / span, 0.0, 1.0);
    dst[k] = static_cast<std::uint8_t>(std::lround(t * 255.0));
  }
  return out;
}

RgbImage heatmap(const Image<double>& values, double lo, double hi) {
  RgbImage out(values.width(), values.height());
  const double span = hi > lo ? hi - lo : 1.0;
  auto src = values.pixels();
  auto dst = out.pixels();
  auto channel = [](double x) { return static_cast<std::uint8_t>(std::lround(std::clamp(x, 0.0, 1.0) * 255.0)); };
  for (std::size_t k = 0; k < src.size(); ++k) {
    const double t = std::clamp((src[k] - lo) / span, 0.0, 1.0);
    dst[k] = Rgb{channel(3.0 * t), channel(3.0 * t - 1.0), channel(3.0 * t - 2.0)};
  }
  return out;
}

}  // namespace ame
