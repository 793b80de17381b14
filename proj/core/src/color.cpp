#include "chromex/color.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "chromex/error.hpp"

namespace chromex {

namespace {

// D65 reference white, 2 degree observer.
constexpr double kXn = 0.95047;
constexpr double kYn = 1.0;
constexpr double kZn = 1.08883;

constexpr double kDelta = 6.0 / 29.0;

double decode_channel(double c) {
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double encode_channel(double c) {
  return c <= 0.0031308 ? 12.92 * c : 1.055 * std::pow(c, 1.0 / 2.4) - 0.055;
}

const std::array<double, 256>& decode_table() {
  static const std::array<double, 256> table = [] {
    std::array<double, 256> t{};
    for (int i = 0; i < 256; ++i) t[static_cast<std::size_t>(i)] = decode_channel(i / 255.0);
    return t;
  }();
  return table;
}

double lab_f(double t) {
  return t > kDelta * kDelta * kDelta ? std::cbrt(t) : t / (3.0 * kDelta * kDelta) + 4.0 / 29.0;
}

double lab_f_inv(double t) {
  return t > kDelta ? t * t * t : 3.0 * kDelta * kDelta * (t - 4.0 / 29.0);
}

std::uint8_t to_byte(double c) {
  const double v = std::clamp(c, 0.0, 1.0) * 255.0;
  return static_cast<std::uint8_t>(std::lround(v));
}

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

LabColor srgb_to_lab(Rgb8 rgb) {
  const auto& lut = decode_table();
  const double r = lut[rgb.r];
  const double g = lut[rgb.g];
  const double b = lut[rgb.b];

  const double x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
  const double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
  const double z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;

  const double fx = lab_f(x / kXn);
  const double fy = lab_f(y / kYn);
  const double fz = lab_f(z / kZn);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

Rgb8 lab_to_srgb(const LabColor& lab) {
  const double fy = (lab.L + 16.0) / 116.0;
  const double fx = fy + lab.a / 500.0;
  const double fz = fy - lab.b / 200.0;

  const double x = kXn * lab_f_inv(fx);
  const double y = kYn * lab_f_inv(fy);
  const double z = kZn * lab_f_inv(fz);

  const double r = 3.2404542 * x - 1.5371385 * y - 0.4985314 * z;
  const double g = -0.9692660 * x + 1.8760108 * y + 0.0415560 * z;
  const double b = 0.0556434 * x - 0.2040259 * y + 1.0572252 * z;

  return {to_byte(encode_channel(std::clamp(r, 0.0, 1.0))),
          to_byte(encode_channel(std::clamp(g, 0.0, 1.0))),
          to_byte(encode_channel(std::clamp(b, 0.0, 1.0)))};
}

NormLab normalize_lab(const LabColor& c) {
  return {c.L / 100.0, (c.a + 128.0) / 255.0, (c.b + 128.0) / 255.0};
}

LabColor denormalize_lab(const NormLab& c) {
  return {c.l * 100.0, c.a * 255.0 - 128.0, c.b * 255.0 - 128.0};
}

double delta_norm(const NormLab& c1, const NormLab& c2) {
  const double dl = c1.l - c2.l;
  const double da = c1.a - c2.a;
  const double db = c1.b - c2.b;
  return std::sqrt(dl * dl + da * da + db * db);
}

double delta_norm(const LabColor& c1, const LabColor& c2) {
  return delta_norm(normalize_lab(c1), normalize_lab(c2));
}

LabColor clamp_lab(const LabColor& c) {
  return {std::clamp(c.L, 0.0, 100.0), std::clamp(c.a, -128.0, 127.0),
          std::clamp(c.b, -128.0, 127.0)};
}

std::string to_hex(Rgb8 rgb) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", rgb.r, rgb.g, rgb.b);
  return buf;
}

Rgb8 parse_hex(std::string_view text) {
  if (!text.empty() && text.front() == '#') text.remove_prefix(1);
  if (text.size() != 6) {
    throw Error(ErrorCode::invalid_argument, "bad hex color '" + std::string(text) + "'");
  }
  std::array<std::uint8_t, 3> v{};
  for (std::size_t i = 0; i < 3; ++i) {
    const int hi = hex_digit(text[2 * i]);
    const int lo = hex_digit(text[2 * i + 1]);
    if (hi < 0 || lo < 0) {
      throw Error(ErrorCode::invalid_argument, "bad hex color '" + std::string(text) + "'");
    }
    v[i] = static_cast<std::uint8_t>(hi * 16 + lo);
  }
  return {v[0], v[1], v[2]};
}

std::string_view kind_name(ColormapKind kind) {
  return kind == ColormapKind::discrete ? "discrete" : "continuous";
}

ColormapKind parse_kind(std::string_view text) {
  if (text == "discrete") return ColormapKind::discrete;
  if (text == "continuous") return ColormapKind::continuous;
  throw Error(ErrorCode::invalid_argument, "unknown colormap kind '" + std::string(text) + "'");
}

void Colormap::validate() const {
  if (kind == ColormapKind::discrete) {
    if (colors.empty() || colors.size() > kMaxDiscreteSize) {
      throw Error(ErrorCode::invalid_argument,
                  "discrete colormap '" + name + "' must have 1..10 colors, has " +
                      std::to_string(colors.size()));
    }
  } else if (colors.size() != kContinuousSize) {
    throw Error(ErrorCode::invalid_argument, "continuous colormap '" + name +
                                                 "' must have 256 colors, has " +
                                                 std::to_string(colors.size()));
  }
  for (const auto& c : colors) {
    if (!std::isfinite(c.L) || !std::isfinite(c.a) || !std::isfinite(c.b)) {
      throw Error(ErrorCode::invalid_argument, "colormap '" + name + "' has a non-finite color");
    }
  }
}

Colormap reversed(Colormap cmap) {
  std::reverse(cmap.colors.begin(), cmap.colors.end());
  return cmap;
}

std::vector<int> legend_block_widths(std::size_t m) {
  if (m == 0) throw Error(ErrorCode::invalid_argument, "legend needs at least one color");
  const int n = static_cast<int>(m);
  std::vector<int> widths(m, ColormapImage::kCols / n);
  for (int i = 0; i < ColormapImage::kCols % n; ++i) ++widths[static_cast<std::size_t>(i)];
  return widths;
}

ColormapImage to_legend_image(const Colormap& cmap) {
  cmap.validate();
  ColormapImage img;
  std::array<Rgb8, ColormapImage::kCols> row{};
  if (cmap.is_continuous()) {
    for (int col = 0; col < ColormapImage::kCols; ++col) {
      row[static_cast<std::size_t>(col)] = lab_to_srgb(cmap.colors[static_cast<std::size_t>(col)]);
    }
  } else {
    const auto widths = legend_block_widths(cmap.size());
    int col = 0;
    for (std::size_t k = 0; k < widths.size(); ++k) {
      const Rgb8 rgb = lab_to_srgb(cmap.colors[k]);
      for (int w = 0; w < widths[k]; ++w) row[static_cast<std::size_t>(col++)] = rgb;
    }
  }
  for (int r = 0; r < ColormapImage::kRows; ++r) {
    std::copy(row.begin(), row.end(), img.pixels.begin() + r * ColormapImage::kCols);
  }
  return img;
}

LabColor sample(const Colormap& cmap, double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw Error(ErrorCode::out_of_range, "sample position must lie in [0,1]");
  }
  if (cmap.colors.empty()) throw Error(ErrorCode::empty_input, "cannot sample an empty colormap");

  if (cmap.is_continuous()) {
    const double last = static_cast<double>(cmap.size() - 1);
    const double pos = t * last;
    const double nearest = std::round(pos);
    // Positions that land on an entry up to rounding noise return the entry verbatim.
    if (std::abs(pos - nearest) < 1e-9) return cmap.colors[static_cast<std::size_t>(nearest)];
    const auto i0 = static_cast<std::size_t>(std::floor(pos));
    const std::size_t i1 = std::min(i0 + 1, cmap.size() - 1);
    const double f = pos - static_cast<double>(i0);
    const LabColor& c0 = cmap.colors[i0];
    const LabColor& c1 = cmap.colors[i1];
    return {c0.L + f * (c1.L - c0.L), c0.a + f * (c1.a - c0.a), c0.b + f * (c1.b - c0.b)};
  }

  const int column = static_cast<int>(std::floor(t * (ColormapImage::kCols - 1)));
  const auto widths = legend_block_widths(cmap.size());
  int end = 0;
  for (std::size_t k = 0; k < widths.size(); ++k) {
    end += widths[k];
    if (column < end) return cmap.colors[k];
  }
  return cmap.colors.back();
}

ColormapImage mirror_horizontal(const ColormapImage& img) {
  ColormapImage out;
  for (int r = 0; r < ColormapImage::kRows; ++r) {
    for (int c = 0; c < ColormapImage::kCols; ++c) {
      out.at(r, ColormapImage::kCols - 1 - c) = img.at(r, c);
    }
  }
  return out;
}

}  // namespace chromex
