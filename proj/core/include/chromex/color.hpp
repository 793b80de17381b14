#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace chromex {

struct Rgb8 {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend auto operator<=>(const Rgb8&, const Rgb8&) = default;
};

/// CIELab color under D65. L in [0,100]; a and b in [-128,127].
struct LabColor {
  double L = 0.0;
  double a = 0.0;
  double b = 0.0;

  friend bool operator==(const LabColor&, const LabColor&) = default;
};

/// Lab with each channel mapped affinely onto [0,1].
struct NormLab {
  double l = 0.0;
  double a = 0.0;
  double b = 0.0;

  friend bool operator==(const NormLab&, const NormLab&) = default;
};

LabColor srgb_to_lab(Rgb8 rgb);

/// Out-of-gamut results are clamped per channel, then rounded.
Rgb8 lab_to_srgb(const LabColor& lab);

NormLab normalize_lab(const LabColor& c);
LabColor denormalize_lab(const NormLab& c);

/// Euclidean distance in normalized Lab; range [0, sqrt(3)].
double delta_norm(const LabColor& c1, const LabColor& c2);
double delta_norm(const NormLab& c1, const NormLab& c2);

/// Clamps each channel into the documented Lab ranges.
LabColor clamp_lab(const LabColor& c);

std::string to_hex(Rgb8 rgb);
/// Accepts "#RRGGBB" or "RRGGBB" (case-insensitive).
Rgb8 parse_hex(std::string_view text);

enum class ColormapKind { discrete, continuous };

std::string_view kind_name(ColormapKind kind);
ColormapKind parse_kind(std::string_view text);

inline constexpr std::size_t kContinuousSize = 256;
inline constexpr std::size_t kMaxDiscreteSize = 10;

struct Colormap {
  ColormapKind kind = ColormapKind::discrete;
  std::vector<LabColor> colors;
  std::string name;

  std::size_t size() const noexcept { return colors.size(); }
  bool is_continuous() const noexcept { return kind == ColormapKind::continuous; }

  /// Throws Error(invalid_argument) when the size invariant for the kind fails.
  void validate() const;

  friend bool operator==(const Colormap&, const Colormap&) = default;
};

/// Returns the colormap with colors in reverse order.
Colormap reversed(Colormap cmap);

/// 10x256 legend strip; the network's prediction and supervision format.
struct ColormapImage {
  static constexpr int kRows = 10;
  static constexpr int kCols = 256;

  std::array<Rgb8, kRows * kCols> pixels{};

  Rgb8& at(int row, int col) { return pixels[static_cast<std::size_t>(row * kCols + col)]; }
  const Rgb8& at(int row, int col) const {
    return pixels[static_cast<std::size_t>(row * kCols + col)];
  }

  friend bool operator==(const ColormapImage&, const ColormapImage&) = default;
};

/// Widths of the m legend blocks of a discrete map; the first 256 % m blocks are one wider.
std::vector<int> legend_block_widths(std::size_t m);

ColormapImage to_legend_image(const Colormap& cmap);

/// Color at position t in [0,1]. Continuous maps interpolate linearly in Lab between
/// neighbouring entries; discrete maps return the legend block under column floor(t*255).
LabColor sample(const Colormap& cmap, double t);

ColormapImage mirror_horizontal(const ColormapImage& img);

}  // namespace chromex
