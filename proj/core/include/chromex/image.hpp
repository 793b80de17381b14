#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "chromex/color.hpp"

namespace chromex {

/// Row-major 8-bit RGB raster.
class RgbImage {
 public:
  RgbImage() = default;
  RgbImage(int width, int height, Rgb8 fill = {255, 255, 255});

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return pixels_.empty(); }

  Rgb8& at(int x, int y) { return pixels_[index(x, y)]; }
  const Rgb8& at(int x, int y) const { return pixels_[index(x, y)]; }

  std::span<Rgb8> pixels() noexcept { return pixels_; }
  std::span<const Rgb8> pixels() const noexcept { return pixels_; }

  friend bool operator==(const RgbImage&, const RgbImage&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<Rgb8> pixels_;
};

/// Decodes an 8-bit RGB/RGBA/gray PNG. Alpha is composited over white.
RgbImage read_png(const std::filesystem::path& path);
RgbImage decode_png(std::span<const std::uint8_t> bytes);

void write_png(const std::filesystem::path& path, const RgbImage& img);
std::vector<std::uint8_t> encode_png(const RgbImage& img);

/// Lossless geometric transforms.
RgbImage rotate90(const RgbImage& img);  // clockwise
RgbImage rotate180(const RgbImage& img);
RgbImage rotate270(const RgbImage& img);
RgbImage mirror_x(const RgbImage& img);
RgbImage upscale_nearest(const RgbImage& img, int factor);

/// Wraps a legend strip as an image (width 256, height 10).
RgbImage to_rgb_image(const ColormapImage& legend);

}  // namespace chromex
