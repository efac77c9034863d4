#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "dasa/matrix.hpp"

namespace dasa {

// Row-major, channel-interleaved raster with values in [0,1].
struct RasterImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t channels = 1;  // 1 or 3
  std::vector<double> pixels;

  static RasterImage make(std::size_t width, std::size_t height, std::size_t channels,
                          double fill = 0.0) {
    RasterImage img;
    img.width = width;
    img.height = height;
    img.channels = channels;
    img.pixels.assign(width * height * channels, fill);
    return img;
  }

  double& at(std::size_t x, std::size_t y, std::size_t c = 0) {
    return pixels[(y * width + x) * channels + c];
  }
  double at(std::size_t x, std::size_t y, std::size_t c = 0) const {
    return pixels[(y * width + x) * channels + c];
  }

  void validate() const;

  bool operator==(const RasterImage&) const = default;
};

// Reads PNG, binary PPM (P6) or binary PGM (P5), 8- or 16-bit, scaling pixel
// values to [0,1]. Unsupported or unreadable files raise an error naming the
// path and the expected formats.
RasterImage load_image(const std::string& path);

// Writes 8-bit output; the format is picked from the extension
// (.png / .ppm / .pgm). PPM requires 3 channels, PGM requires 1.
void save_image(const RasterImage& img, const std::string& path);

// 16-bit PGM, used for probability maps. Values are clamped to [0,1] and
// quantized to 65535 levels.
void save_pgm16(const Matrix& values, const std::string& path);

}  // namespace dasa
