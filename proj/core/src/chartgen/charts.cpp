#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "chartgen/raster.hpp"
#include "chromex/chartgen.hpp"
#include "chromex/error.hpp"

namespace chromex {

namespace {

using raster::Canvas;
using raster::Point;
using raster::Polygon;

struct ChartTypeInfo {
  ChartType type;
  std::string_view name;
};

constexpr ChartTypeInfo kChartTypes[] = {
    {ChartType::line, "line"},
    {ChartType::pie, "pie"},
    {ChartType::grouped_bar, "grouped_bar"},
    {ChartType::stacked_bar, "stacked_bar"},
    {ChartType::scatter, "scatter"},
    {ChartType::stream, "stream"},
    {ChartType::heatmap, "heatmap"},
    {ChartType::region_map, "region_map"},
};

constexpr Rgb8 kAxisColor{0, 0, 0};

struct PlotArea {
  double left, top, right, bottom;
  double width() const { return right - left; }
  double height() const { return bottom - top; }
};

PlotArea plot_area(const ChartStyle& s) {
  return {28.0, 12.0, s.width - 12.0, s.height - 24.0};
}

// Crisp one-pixel axes along the left and bottom edges of the plot area.
void draw_axes(Canvas& canvas, const PlotArea& area) {
  const double x = std::floor(area.left) - 1.0;
  const double y = std::floor(area.bottom);
  canvas.fill_rect(x, std::floor(area.top), x + 1.0, y + 1.0, kAxisColor);
  canvas.fill_rect(x, y, std::ceil(area.right), y + 1.0, kAxisColor);
}

std::pair<double, double> value_range(const std::vector<const std::vector<double>*>& cols) {
  double lo = 1e300;
  double hi = -1e300;
  for (const auto* col : cols) {
    for (double v : *col) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  return {lo, hi};
}

/// Maps v from [lo, hi] onto [0, 1]; a flat range maps to 0.
double unit(double v, double lo, double hi) { return hi > lo ? (v - lo) / (hi - lo) : 0.0; }

/// Positive magnitudes for bars, slices and stream layers: [lo, hi] onto [0.15, 1].
double magnitude(double v, double lo, double hi) {
  return hi > lo ? 0.15 + 0.85 * (v - lo) / (hi - lo) : 1.0;
}

std::vector<const std::vector<double>*> value_columns(const DataTable& t) {
  std::vector<const std::vector<double>*> out;
  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    if (!t.paired || c % 2 == 1) out.push_back(&t.columns[c]);
  }
  return out;
}

Rgb8 category_color(const Colormap& cmap, std::size_t c) {
  return lab_to_srgb(cmap.colors[c % cmap.size()]);
}

Polygon rect(double x0, double y0, double x1, double y1) {
  return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
}

void outline(Canvas& canvas, const ChartStyle& style, const Polygon& shape) {
  if (style.stroke) canvas.stroke(shape, style.stroke_width, style.background, true);
}

void draw_line(Canvas& canvas, const ChartStyle& style, const DataTable& t, const Colormap& cmap) {
  const PlotArea area = plot_area(style);
  const auto cols = value_columns(t);
  const auto [lo, hi] = value_range(cols);
  const std::size_t n = t.rows();
  for (std::size_t c = 0; c < cols.size(); ++c) {
    Polygon line;
    for (std::size_t i = 0; i < n; ++i) {
      const double fx = n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.5;
      const double fy = 0.05 + 0.9 * unit((*cols[c])[i], lo, hi);
      line.push_back({area.left + fx * area.width(), area.bottom - fy * area.height()});
    }
    canvas.stroke(line, style.line_width, category_color(cmap, c));
  }
}

void draw_pie(Canvas& canvas, const ChartStyle& style, const DataTable& t, const Colormap& cmap) {
  const auto cols = value_columns(t);
  const auto [lo, hi] = value_range(cols);
  std::vector<double> slices;
  for (const auto* col : cols) slices.push_back(magnitude(col->front(), lo, hi));
  double total = 0.0;
  for (double s : slices) total += s;
  const Point center{style.width / 2.0, style.height / 2.0};
  const double radius = 0.42 * style.height;
  double angle = 0.0;
  std::vector<Polygon> shapes;
  for (std::size_t c = 0; c < slices.size(); ++c) {
    const double next = c + 1 == slices.size() ? 2.0 * std::numbers::pi
                                               : angle + 2.0 * std::numbers::pi * slices[c] / total;
    shapes.push_back(raster::sector(center, radius, angle, next));
    canvas.fill(shapes.back(), category_color(cmap, c));
    angle = next;
  }
  for (const Polygon& s : shapes) outline(canvas, style, s);
}

void draw_bars(Canvas& canvas, const ChartStyle& style, const DataTable& t, const Colormap& cmap,
               bool stacked) {
  const PlotArea area = plot_area(style);
  const auto cols = value_columns(t);
  const auto [lo, hi] = value_range(cols);
  const std::size_t groups = t.rows();
  const std::size_t cats = cols.size();
  const double slot = area.width() / static_cast<double>(groups);
  const double used = slot * (1.0 - style.bar_spacing);

  double max_stack = 0.0;
  for (std::size_t g = 0; g < groups; ++g) {
    double s = 0.0;
    for (const auto* col : cols) s += magnitude((*col)[g], lo, hi);
    max_stack = std::max(max_stack, s);
  }

  std::vector<Polygon> shapes;
  for (std::size_t g = 0; g < groups; ++g) {
    const double x0 = area.left + g * slot + 0.5 * (slot - used);
    double base = area.bottom;
    for (std::size_t c = 0; c < cats; ++c) {
      const double m = magnitude((*cols[c])[g], lo, hi);
      Polygon bar;
      if (stacked) {
        const double h = 0.95 * area.height() * m / max_stack;
        bar = rect(x0, base - h, x0 + used, base);
        base -= h;
      } else {
        const double w = used / static_cast<double>(cats);
        const double h = 0.95 * area.height() * m;
        bar = rect(x0 + c * w, area.bottom - h, x0 + (c + 1) * w, area.bottom);
      }
      canvas.fill(bar, category_color(cmap, c));
      shapes.push_back(std::move(bar));
    }
  }
  for (const Polygon& s : shapes) outline(canvas, style, s);
}

void draw_scatter(Canvas& canvas, const ChartStyle& style, const DataTable& t,
                  const Colormap& cmap) {
  const PlotArea area = plot_area(style);
  const std::size_t cats = t.categories();
  const std::size_t n = t.rows();
  std::vector<const std::vector<double>*> xs;
  std::vector<const std::vector<double>*> ys;
  for (std::size_t c = 0; c < cats; ++c) {
    if (t.paired) xs.push_back(&t.columns[2 * c]);
    ys.push_back(&t.columns[t.paired ? 2 * c + 1 : c]);
  }
  const auto [ylo, yhi] = value_range(ys);
  double xlo = 0.0;
  double xhi = static_cast<double>(n > 1 ? n - 1 : 1);
  if (t.paired) std::tie(xlo, xhi) = value_range(xs);
  const double r = style.marker_radius;
  const double inset = r + 1.0;
  for (std::size_t c = 0; c < cats; ++c) {
    std::vector<Polygon> markers;
    for (std::size_t i = 0; i < n; ++i) {
      const double xv = t.paired ? (*xs[c])[i] : static_cast<double>(i);
      const double fx = n > 1 || t.paired ? unit(xv, xlo, xhi) : 0.5;
      const double fy = unit((*ys[c])[i], ylo, yhi);
      const Point p{area.left + inset + fx * (area.width() - 2 * inset),
                    area.bottom - inset - fy * (area.height() - 2 * inset)};
      markers.push_back(raster::circle(p, r, 24));
    }
    canvas.fill(markers, category_color(cmap, c));
    if (style.stroke) {
      for (const Polygon& m : markers) outline(canvas, style, m);
    }
  }
}

/// Fritsch-Carlson monotone cubic through (i, y[i]), evaluated at fractional index x.
class MonotoneCubic {
 public:
  explicit MonotoneCubic(std::vector<double> y) : y_(std::move(y)), m_(y_.size(), 0.0) {
    const std::size_t n = y_.size();
    if (n < 2) return;
    std::vector<double> d(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) d[i] = y_[i + 1] - y_[i];
    m_[0] = d[0];
    m_[n - 1] = d[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i) {
      m_[i] = d[i - 1] * d[i] <= 0.0 ? 0.0 : 0.5 * (d[i - 1] + d[i]);
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (d[i] == 0.0) {
        m_[i] = m_[i + 1] = 0.0;
        continue;
      }
      const double a = m_[i] / d[i];
      const double b = m_[i + 1] / d[i];
      const double s = a * a + b * b;
      if (s > 9.0) {
        const double tau = 3.0 / std::sqrt(s);
        m_[i] = tau * a * d[i];
        m_[i + 1] = tau * b * d[i];
      }
    }
  }

  double operator()(double x) const {
    const std::size_t n = y_.size();
    if (n == 1) return y_[0];
    const auto i = std::min(static_cast<std::size_t>(std::max(0.0, std::floor(x))), n - 2);
    const double t = std::clamp(x - static_cast<double>(i), 0.0, 1.0);
    const double t2 = t * t;
    const double t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y_[i] + (t3 - 2 * t2 + t) * m_[i] +
           (-2 * t3 + 3 * t2) * y_[i + 1] + (t3 - t2) * m_[i + 1];
  }

 private:
  std::vector<double> y_;
  std::vector<double> m_;
};

void draw_stream(Canvas& canvas, const ChartStyle& style, const DataTable& t,
                 const Colormap& cmap) {
  const PlotArea area = plot_area(style);
  const auto cols = value_columns(t);
  const auto [lo, hi] = value_range(cols);
  const std::size_t n = t.rows();
  std::vector<MonotoneCubic> layers;
  for (const auto* col : cols) {
    std::vector<double> m;
    for (double v : *col) m.push_back(magnitude(v, lo, hi));
    layers.emplace_back(std::move(m));
  }

  const int steps = std::max(2, static_cast<int>(area.width() / 2.0));
  std::vector<std::vector<double>> thickness(layers.size(), std::vector<double>(steps + 1));
  std::vector<double> total(steps + 1, 0.0);
  double max_total = 0.0;
  for (int s = 0; s <= steps; ++s) {
    const double x = n > 1 ? static_cast<double>(n - 1) * s / steps : 0.0;
    for (std::size_t k = 0; k < layers.size(); ++k) {
      thickness[k][s] = std::max(0.0, layers[k](x));
      total[s] += thickness[k][s];
    }
    max_total = std::max(max_total, total[s]);
  }

  const double scale = 0.95 * area.height() / max_total;
  const double mid = 0.5 * (area.top + area.bottom);
  std::vector<double> lower(steps + 1);
  for (int s = 0; s <= steps; ++s) lower[s] = mid + 0.5 * total[s] * scale;
  std::vector<Polygon> shapes;
  for (std::size_t k = 0; k < layers.size(); ++k) {
    Polygon band;
    std::vector<double> upper(steps + 1);
    for (int s = 0; s <= steps; ++s) {
      upper[s] = lower[s] - thickness[k][s] * scale;
      band.push_back({area.left + area.width() * s / steps, upper[s]});
    }
    for (int s = steps; s >= 0; --s) band.push_back({area.left + area.width() * s / steps, lower[s]});
    canvas.fill(band, category_color(cmap, k));
    shapes.push_back(std::move(band));
    lower = std::move(upper);
  }
  for (const Polygon& s : shapes) outline(canvas, style, s);
}

void draw_heatmap(Canvas& canvas, const ChartStyle& style, const DataTable& t,
                  const Colormap& cmap) {
  const PlotArea area = plot_area(style);
  std::vector<std::vector<double>> grid;  // grid[row][col] in [0,1]
  if (t.paired) {
    // Point clouds become a 2D density grid.
    constexpr int kRows = 16;
    constexpr int kCols = 32;
    std::vector<const std::vector<double>*> xs;
    std::vector<const std::vector<double>*> ys;
    for (std::size_t c = 0; c < t.categories(); ++c) {
      xs.push_back(&t.columns[2 * c]);
      ys.push_back(&t.columns[2 * c + 1]);
    }
    const auto [xlo, xhi] = value_range(xs);
    const auto [ylo, yhi] = value_range(ys);
    grid.assign(kRows, std::vector<double>(kCols, 0.0));
    for (std::size_t c = 0; c < xs.size(); ++c) {
      for (std::size_t i = 0; i < xs[c]->size(); ++i) {
        const int gx = std::min(kCols - 1, static_cast<int>(unit((*xs[c])[i], xlo, xhi) * kCols));
        const int gy = std::min(kRows - 1, static_cast<int>(unit((*ys[c])[i], ylo, yhi) * kRows));
        grid[kRows - 1 - gy][gx] += 1.0;
      }
    }
    double peak = 0.0;
    for (const auto& row : grid) peak = std::max(peak, *std::max_element(row.begin(), row.end()));
    for (auto& row : grid) {
      for (double& v : row) v /= peak;
    }
  } else {
    const auto cols = value_columns(t);
    const auto [lo, hi] = value_range(cols);
    for (const auto* col : cols) {
      std::vector<double> row;
      for (double v : *col) row.push_back(unit(v, lo, hi));
      grid.push_back(std::move(row));
    }
  }

  const std::size_t rows = grid.size();
  const std::size_t cols = grid.front().size();
  // Cell edges snap to whole pixels so neighbouring cells never blend.
  const auto edge_x = [&](std::size_t i) {
    return std::round(area.left + area.width() * static_cast<double>(i) / static_cast<double>(cols));
  };
  const auto edge_y = [&](std::size_t i) {
    return std::round(area.top + area.height() * static_cast<double>(i) / static_cast<double>(rows));
  };
  std::vector<Polygon> cells;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      Polygon cell = rect(edge_x(c), edge_y(r), edge_x(c + 1), edge_y(r + 1));
      canvas.fill(cell, lab_to_srgb(sample(cmap, std::clamp(grid[r][c], 0.0, 1.0))));
      cells.push_back(std::move(cell));
    }
  }
  for (const Polygon& s : cells) outline(canvas, style, s);
}

void draw_region_map(Canvas& canvas, const ChartStyle& style, const DataTable& t,
                     const Colormap& cmap) {
  const auto& tiles = region_map_tiles();
  const auto cols = value_columns(t);
  std::vector<double> values;
  for (const auto* col : cols) values.insert(values.end(), col->begin(), col->end());
  const auto [lo, hi] = value_range(cols);
  const double x0 = 16.0;
  const double y0 = 12.0;
  const double w = style.width - 32.0;
  const double h = style.height - 24.0;
  std::vector<Polygon> shapes;
  for (std::size_t k = 0; k < tiles.size(); ++k) {
    Polygon poly;
    for (const auto& p : tiles[k]) poly.push_back({x0 + p[0] * w, y0 + p[1] * h});
    const double v = unit(values[k % values.size()], lo, hi);
    canvas.fill(poly, lab_to_srgb(sample(cmap, v)));
    shapes.push_back(std::move(poly));
  }
  for (const Polygon& s : shapes) outline(canvas, style, s);
}

}  // namespace

std::string_view chart_type_name(ChartType t) {
  for (const auto& info : kChartTypes) {
    if (info.type == t) return info.name;
  }
  return "unknown";
}

ChartType parse_chart_type(std::string_view name) {
  for (const auto& info : kChartTypes) {
    if (info.name == name) return info.type;
  }
  throw Error(ErrorCode::invalid_argument, "unknown chart type '" + std::string(name) + "'");
}

ColormapKind required_kind(ChartType t) {
  return t == ChartType::heatmap || t == ChartType::region_map ? ColormapKind::continuous
                                                               : ColormapKind::discrete;
}

const std::vector<std::vector<std::array<double, 2>>>& region_map_tiles() {
  // A 10x5 lattice with jittered interior vertices: 50 irregular quadrilaterals that tile
  // the unit square. Fixed seed, integer-only float mapping, so the geometry is portable.
  static const auto tiles = [] {
    constexpr int kNx = 10;
    constexpr int kNy = 5;
    std::mt19937 rng(20210517u);
    const auto jitter = [&rng] { return (static_cast<double>(rng() >> 8) / 16777216.0 - 0.5) * 0.7; };
    std::vector<std::array<double, 2>> v((kNx + 1) * (kNy + 1));
    for (int j = 0; j <= kNy; ++j) {
      for (int i = 0; i <= kNx; ++i) {
        double x = static_cast<double>(i) / kNx;
        double y = static_cast<double>(j) / kNy;
        const double dx = jitter();
        const double dy = jitter();
        if (i > 0 && i < kNx) x += dx / kNx;
        if (j > 0 && j < kNy) y += dy / kNy;
        v[static_cast<std::size_t>(j * (kNx + 1) + i)] = {x, y};
      }
    }
    std::vector<std::vector<std::array<double, 2>>> out;
    for (int j = 0; j < kNy; ++j) {
      for (int i = 0; i < kNx; ++i) {
        const auto at = [&](int a, int b) { return v[static_cast<std::size_t>(b * (kNx + 1) + a)]; };
        out.push_back({at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)});
      }
    }
    return out;
  }();
  return tiles;
}

RgbImage render_chart(const ChartStyle& style, const DataTable& data, const Colormap& cmap) {
  cmap.validate();
  if (cmap.kind != required_kind(style.type)) {
    throw Error(ErrorCode::kind_mismatch,
                std::string(chart_type_name(style.type)) + " needs a " +
                    std::string(kind_name(required_kind(style.type))) + " colormap");
  }
  if (data.categories() == 0 || data.rows() == 0) {
    throw Error(ErrorCode::invalid_argument,
                std::string(chart_type_name(style.type)) + ": no categories or data points");
  }
  for (const auto& col : data.columns) {
    if (col.size() != data.rows()) {
      throw Error(ErrorCode::invalid_argument, "data columns differ in length");
    }
  }
  if (data.paired && data.columns.size() % 2 != 0) {
    throw Error(ErrorCode::invalid_argument, "paired data needs an even column count");
  }
  if (style.width < 64 || style.height < 64) {
    throw Error(ErrorCode::invalid_argument, "chart must be at least 64x64 pixels");
  }
  if (style.line_width <= 0 || style.marker_radius <= 0 || style.stroke_width <= 0 ||
      style.bar_spacing < 0 || style.bar_spacing >= 1) {
    throw Error(ErrorCode::invalid_argument, "geometry parameters must be positive");
  }

  Canvas canvas(style.width, style.height, style.background, style.antialias);
  switch (style.type) {
    case ChartType::line: draw_line(canvas, style, data, cmap); break;
    case ChartType::pie: draw_pie(canvas, style, data, cmap); break;
    case ChartType::grouped_bar: draw_bars(canvas, style, data, cmap, false); break;
    case ChartType::stacked_bar: draw_bars(canvas, style, data, cmap, true); break;
    case ChartType::scatter: draw_scatter(canvas, style, data, cmap); break;
    case ChartType::stream: draw_stream(canvas, style, data, cmap); break;
    case ChartType::heatmap: draw_heatmap(canvas, style, data, cmap); break;
    case ChartType::region_map: draw_region_map(canvas, style, data, cmap); break;
  }
  const bool cartesian = style.type != ChartType::pie && style.type != ChartType::region_map &&
                         style.type != ChartType::stream;
  if (style.axes && cartesian) draw_axes(canvas, plot_area(style));
  return canvas.take();
}

}  // namespace chromex
