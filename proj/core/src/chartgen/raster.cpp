#include "chartgen/raster.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

namespace chromex::raster {

namespace {

struct Edge {
  double x0, y0, x1, y1;
  int dir;
};

double signed_area(const Polygon& p) {
  double s = 0.0;
  for (std::size_t i = 0, j = p.size() - 1; i < p.size(); j = i++) {
    s += (p[j].x * p[i].y) - (p[i].x * p[j].y);
  }
  return 0.5 * s;
}

std::uint8_t mix(std::uint8_t src, std::uint8_t dst, int covered, int total) {
  const int v = (src * covered + dst * (total - covered) + total / 2) / total;
  return static_cast<std::uint8_t>(v);
}

}  // namespace

Canvas::Canvas(int width, int height, Rgb8 background, bool antialias)
    : image_(width, height, background),
      background_(background),
      antialias_(antialias),
      samples_(antialias ? 4 : 1),
      mask_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0) {}

void Canvas::fill(const std::vector<Polygon>& paths, Rgb8 color) {
  // Orient every subpath the same way so the nonzero rule yields their union.
  std::vector<Edge> edges;
  double ymin = 1e300;
  double ymax = -1e300;
  for (const Polygon& path : paths) {
    if (path.size() < 3) continue;
    const int dir = signed_area(path) >= 0.0 ? 1 : -1;
    for (std::size_t i = 0, j = path.size() - 1; i < path.size(); j = i++) {
      const Point& a = path[j];
      const Point& b = path[i];
      if (a.y == b.y) continue;
      const int w = (b.y > a.y ? 1 : -1) * dir;
      edges.push_back(a.y < b.y ? Edge{a.x, a.y, b.x, b.y, w} : Edge{b.x, b.y, a.x, a.y, w});
      ymin = std::min(ymin, std::min(a.y, b.y));
      ymax = std::max(ymax, std::max(a.y, b.y));
    }
  }
  if (edges.empty()) return;

  const int s = samples_;
  const int w = width();
  const int sample_w = w * s;
  const int row_lo = std::max(0, static_cast<int>(std::floor(ymin * s - 0.5)));
  const int row_hi = std::min(height() * s, static_cast<int>(std::ceil(ymax * s + 0.5)));
  if (row_lo >= row_hi) return;

  std::vector<std::pair<double, int>> crossings;
  for (int sy = row_lo; sy < row_hi; ++sy) {
    const double y = (sy + 0.5) / s;
    crossings.clear();
    for (const Edge& e : edges) {
      if (y < e.y0 || y >= e.y1) continue;
      const double t = (y - e.y0) / (e.y1 - e.y0);
      crossings.emplace_back(e.x0 + t * (e.x1 - e.x0), e.dir);
    }
    if (crossings.empty()) continue;
    std::sort(crossings.begin(), crossings.end());
    const std::size_t py = static_cast<std::size_t>(sy / s) * static_cast<std::size_t>(w);
    const int bit_row = (sy % s) * s;
    int winding = 0;
    for (std::size_t k = 0; k + 1 < crossings.size(); ++k) {
      winding += crossings[k].second;
      if (winding == 0) continue;
      // Sample column sx sits at (sx + 0.5) / s; cover those inside [x0, x1).
      const int sx0 = std::max(0, static_cast<int>(std::ceil(crossings[k].first * s - 0.5)));
      const int sx1 =
          std::min(sample_w, static_cast<int>(std::ceil(crossings[k + 1].first * s - 0.5)));
      for (int sx = sx0; sx < sx1; ++sx) {
        mask_[py + static_cast<std::size_t>(sx / s)] |=
            static_cast<std::uint16_t>(1u << (bit_row + sx % s));
      }
    }
  }

  const int total = s * s;
  const int py_lo = row_lo / s;
  const int py_hi = (row_hi + s - 1) / s;
  for (int py = py_lo; py < py_hi; ++py) {
    for (int px = 0; px < w; ++px) {
      std::uint16_t& m = mask_[static_cast<std::size_t>(py) * w + px];
      if (m == 0) continue;
      const int covered = std::popcount(m);
      m = 0;
      Rgb8& dst = image_.at(px, py);
      if (covered == total) {
        dst = color;
      } else {
        dst = {mix(color.r, dst.r, covered, total), mix(color.g, dst.g, covered, total),
               mix(color.b, dst.b, covered, total)};
      }
    }
  }
}

void Canvas::fill_rect(double x0, double y0, double x1, double y1, Rgb8 color) {
  fill(Polygon{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}, color);
}

void Canvas::stroke(const Polygon& line, double width, Rgb8 color, bool closed) {
  if (line.empty() || width <= 0.0) return;
  const double r = 0.5 * width;
  std::vector<Polygon> parts;
  const std::size_t n = line.size();
  const std::size_t segments = closed ? n : n - 1;
  for (std::size_t i = 0; i < segments; ++i) {
    const Point& a = line[i];
    const Point& b = line[(i + 1) % n];
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    const double len = std::hypot(dx, dy);
    if (len == 0.0) continue;
    const double nx = -dy / len * r;
    const double ny = dx / len * r;
    parts.push_back({{a.x + nx, a.y + ny}, {b.x + nx, b.y + ny}, {b.x - nx, b.y - ny},
                     {a.x - nx, a.y - ny}});
  }
  const int joint_segments = std::clamp(static_cast<int>(std::ceil(r * 4.0)), 8, 32);
  for (const Point& p : line) parts.push_back(circle(p, r, joint_segments));
  fill(parts, color);
}

Polygon circle(Point center, double radius, int segments) {
  Polygon p;
  p.reserve(static_cast<std::size_t>(segments));
  for (int i = 0; i < segments; ++i) {
    const double a = 2.0 * std::numbers::pi * i / segments;
    p.push_back({center.x + radius * std::cos(a), center.y + radius * std::sin(a)});
  }
  return p;
}

Polygon sector(Point center, double radius, double a0, double a1) {
  const double span = a1 - a0;
  const int steps = std::max(2, static_cast<int>(std::ceil(span / (std::numbers::pi / 90.0))));
  Polygon p;
  p.reserve(static_cast<std::size_t>(steps) + 2);
  if (span < 2.0 * std::numbers::pi - 1e-9) p.push_back(center);
  for (int i = 0; i <= steps; ++i) {
    const double a = a0 + span * i / steps;
    p.push_back({center.x + radius * std::sin(a), center.y - radius * std::cos(a)});
  }
  return p;
}

}  // namespace chromex::raster
