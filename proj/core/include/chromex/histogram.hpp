#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "chromex/color.hpp"
#include "chromex/image.hpp"

namespace chromex {

inline constexpr int kLBins = 256;
inline constexpr int kABBins = 128;

struct LabBin {
  int L = 0;
  int a = 0;
  int b = 0;

  friend auto operator<=>(const LabBin&, const LabBin&) = default;
};

/// L into 256 bins over [0,100], a and b into 128 bins over [-128,128); clamped at the edges.
LabBin lab_bins(const LabColor& c);
LabColor bin_center(const LabBin& bin);

/// Text and grid strokes: L < 10 with near-neutral chroma, anti-aliased edges included.
bool is_black_like(const LabColor& c);

/// 256x256 network input. Columns 0..127 hold the L-a histogram, columns 128..255 the
/// L-b histogram; the row is the L bin. Each half is scaled so its maximum is 1.
class HistogramMap {
 public:
  static constexpr int kSize = 256;

  HistogramMap() : grid_(static_cast<std::size_t>(kSize) * kSize, 0.0f) {}

  float& at(int row, int col) { return grid_[static_cast<std::size_t>(row * kSize + col)]; }
  float at(int row, int col) const { return grid_[static_cast<std::size_t>(row * kSize + col)]; }

  const std::vector<float>& values() const noexcept { return grid_; }
  bool all_zero() const;
  std::size_t nonzero_count() const;

  friend bool operator==(const HistogramMap&, const HistogramMap&) = default;

 private:
  std::vector<float> grid_;
};

/// Exact-RGB color covering at least 80% of the one-pixel border.
std::optional<Rgb8> detect_background_rgb(const RgbImage& img);
std::optional<LabColor> detect_background(const RgbImage& img);

HistogramMap image_to_histogram_map(const RgbImage& img);

struct WeightedColor {
  LabColor color;  // bin center
  std::uint64_t weight = 0;

  friend bool operator==(const WeightedColor&, const WeightedColor&) = default;
};

/// Occupied (L,a,b) bins over the pixels that survive the background and black filters,
/// sorted by bin index.
std::vector<WeightedColor> foreground_color_bins(const RgbImage& img);

/// Occupied (L,a,b) bins of an arbitrary pixel set, no filtering, sorted by bin index.
std::vector<WeightedColor> color_bins(std::span<const Rgb8> pixels);

/// True when the pixel would be dropped by the histogram filters of `img`.
struct ForegroundMask {
  std::optional<Rgb8> background;
  std::optional<LabBin> background_bin;

  explicit ForegroundMask(const RgbImage& img);
  bool keep(Rgb8 rgb) const;
  bool keep(Rgb8 rgb, const LabColor& lab) const;
};

/// 16-bit binary PGM with values round(65535 * v).
void write_histogram_pgm(const std::filesystem::path& path, const HistogramMap& map);

}  // namespace chromex
