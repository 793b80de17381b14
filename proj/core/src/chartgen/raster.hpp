#pragma once

#include <cstdint>
#include <vector>

#include "chromex/image.hpp"

namespace chromex::raster {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

using Polygon = std::vector<Point>;

/// Polygon filler with optional anti-aliasing. With anti-aliasing each pixel carries a 4x4
/// grid of samples; without it only the pixel center is tested, so every touched pixel
/// receives the exact fill color. All subpaths of one draw call are unioned (nonzero
/// winding) before compositing, so overlapping pieces never double-blend.
class Canvas {
 public:
  Canvas(int width, int height, Rgb8 background, bool antialias);

  int width() const { return image_.width(); }
  int height() const { return image_.height(); }
  Rgb8 background() const { return background_; }

  void fill(const std::vector<Polygon>& paths, Rgb8 color);
  void fill(const Polygon& path, Rgb8 color) { fill(std::vector<Polygon>{path}, color); }

  /// Axis-aligned rectangle; pixel-aligned edges produce no partial coverage.
  void fill_rect(double x0, double y0, double x1, double y1, Rgb8 color);

  /// Thick polyline with round joins and caps.
  void stroke(const Polygon& line, double width, Rgb8 color, bool closed = false);

  const RgbImage& image() const { return image_; }
  RgbImage take() { return std::move(image_); }

 private:
  RgbImage image_;
  Rgb8 background_;
  bool antialias_;
  int samples_;                     // per axis: 4 with anti-aliasing, 1 without
  std::vector<std::uint16_t> mask_; // per-pixel sample coverage bits of the current draw
  std::vector<int> touched_;        // rows touched by the current draw
};

Polygon circle(Point center, double radius, int segments = 32);

/// Annular sector between angles a0 and a1 (radians, clockwise from 12 o'clock).
Polygon sector(Point center, double radius, double a0, double a1);

}  // namespace chromex::raster
