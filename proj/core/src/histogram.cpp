#include "chromex/histogram.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <unordered_map>

#include "chromex/error.hpp"

namespace chromex {

namespace {

std::uint32_t pack(Rgb8 c) {
  return (std::uint32_t{c.r} << 16) | (std::uint32_t{c.g} << 8) | std::uint32_t{c.b};
}

// Memoizes Lab conversion per distinct RGB; charts rarely have more than a few thousand.
class LabCache {
 public:
  const LabColor& operator()(Rgb8 c) {
    auto [it, inserted] = cache_.try_emplace(pack(c));
    if (inserted) it->second = srgb_to_lab(c);
    return it->second;
  }

 private:
  std::unordered_map<std::uint32_t, LabColor> cache_;
};

}  // namespace

LabBin lab_bins(const LabColor& c) {
  const auto bin = [](double v, int n) {
    const double f = std::floor(v);
    if (!(f >= 0.0)) return 0;
    return f >= n - 1 ? n - 1 : static_cast<int>(f);
  };
  return {bin(c.L / 100.0 * kLBins, kLBins), bin((c.a + 128.0) / 256.0 * kABBins, kABBins),
          bin((c.b + 128.0) / 256.0 * kABBins, kABBins)};
}

LabColor bin_center(const LabBin& bin) {
  return {(bin.L + 0.5) * 100.0 / kLBins, (bin.a + 0.5) * 256.0 / kABBins - 128.0,
          (bin.b + 0.5) * 256.0 / kABBins - 128.0};
}

bool is_black_like(const LabColor& c) {
  return c.L < 10.0 && std::abs(c.a) < 10.0 && std::abs(c.b) < 10.0;
}

bool HistogramMap::all_zero() const {
  return std::all_of(grid_.begin(), grid_.end(), [](float v) { return v == 0.0f; });
}

std::size_t HistogramMap::nonzero_count() const {
  return static_cast<std::size_t>(
      std::count_if(grid_.begin(), grid_.end(), [](float v) { return v != 0.0f; }));
}

std::optional<Rgb8> detect_background_rgb(const RgbImage& img) {
  if (img.empty()) return std::nullopt;
  std::map<std::uint32_t, std::size_t> counts;
  std::size_t border = 0;
  const auto visit = [&](int x, int y) {
    ++counts[pack(img.at(x, y))];
    ++border;
  };
  const int w = img.width();
  const int h = img.height();
  for (int x = 0; x < w; ++x) {
    visit(x, 0);
    if (h > 1) visit(x, h - 1);
  }
  for (int y = 1; y + 1 < h; ++y) {
    visit(0, y);
    if (w > 1) visit(w - 1, y);
  }
  for (const auto& [key, count] : counts) {
    if (static_cast<double>(count) >= 0.8 * static_cast<double>(border)) {
      return Rgb8{static_cast<std::uint8_t>(key >> 16), static_cast<std::uint8_t>(key >> 8),
                  static_cast<std::uint8_t>(key)};
    }
  }
  return std::nullopt;
}

std::optional<LabColor> detect_background(const RgbImage& img) {
  if (auto rgb = detect_background_rgb(img)) return srgb_to_lab(*rgb);
  return std::nullopt;
}

HistogramMap image_to_histogram_map(const RgbImage& img) {
  std::vector<std::uint32_t> la(static_cast<std::size_t>(kLBins) * kABBins, 0);
  std::vector<std::uint32_t> lb(static_cast<std::size_t>(kLBins) * kABBins, 0);
  LabCache lab_of;
  for (const Rgb8 px : img.pixels()) {
    const LabColor& lab = lab_of(px);
    if (is_black_like(lab)) continue;
    const LabBin bin = lab_bins(lab);
    ++la[static_cast<std::size_t>(bin.L * kABBins + bin.a)];
    ++lb[static_cast<std::size_t>(bin.L * kABBins + bin.b)];
  }

  if (auto bg = detect_background(img)) {
    const LabBin bin = lab_bins(*bg);
    la[static_cast<std::size_t>(bin.L * kABBins + bin.a)] = 0;
    lb[static_cast<std::size_t>(bin.L * kABBins + bin.b)] = 0;
  }

  HistogramMap map;
  const auto emit = [&map](const std::vector<std::uint32_t>& counts, int col_offset) {
    const std::uint32_t peak = *std::max_element(counts.begin(), counts.end());
    if (peak == 0) return;
    const auto denom = static_cast<float>(peak);
    for (int row = 0; row < kLBins; ++row) {
      for (int col = 0; col < kABBins; ++col) {
        const std::uint32_t n = counts[static_cast<std::size_t>(row * kABBins + col)];
        if (n != 0) map.at(row, col_offset + col) = static_cast<float>(n) / denom;
      }
    }
  };
  emit(la, 0);
  emit(lb, kABBins);
  return map;
}

ForegroundMask::ForegroundMask(const RgbImage& img) : background(detect_background_rgb(img)) {
  if (background) background_bin = lab_bins(srgb_to_lab(*background));
}

bool ForegroundMask::keep(Rgb8 rgb, const LabColor& lab) const {
  if (background && rgb == *background) return false;
  if (is_black_like(lab)) return false;
  if (background_bin && lab_bins(lab) == *background_bin) return false;
  return true;
}

bool ForegroundMask::keep(Rgb8 rgb) const { return keep(rgb, srgb_to_lab(rgb)); }

namespace {

std::vector<WeightedColor> bins_to_colors(const std::map<LabBin, std::uint64_t>& bins) {
  std::vector<WeightedColor> out;
  out.reserve(bins.size());
  for (const auto& [bin, count] : bins) out.push_back({bin_center(bin), count});
  return out;
}

}  // namespace

std::vector<WeightedColor> foreground_color_bins(const RgbImage& img) {
  const ForegroundMask mask(img);
  LabCache lab_of;
  std::map<LabBin, std::uint64_t> bins;
  for (const Rgb8 px : img.pixels()) {
    const LabColor& lab = lab_of(px);
    if (mask.keep(px, lab)) ++bins[lab_bins(lab)];
  }
  return bins_to_colors(bins);
}

std::vector<WeightedColor> color_bins(std::span<const Rgb8> pixels) {
  LabCache lab_of;
  std::map<LabBin, std::uint64_t> bins;
  for (const Rgb8 px : pixels) ++bins[lab_bins(lab_of(px))];
  return bins_to_colors(bins);
}

void write_histogram_pgm(const std::filesystem::path& path, const HistogramMap& map) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot write '" + path.string() + "'");
  out << "P5\n" << HistogramMap::kSize << ' ' << HistogramMap::kSize << "\n65535\n";
  for (const float v : map.values()) {
    const auto q = static_cast<std::uint16_t>(std::lround(65535.0 * std::clamp(v, 0.0f, 1.0f)));
    const char be[2] = {static_cast<char>(q >> 8), static_cast<char>(q & 0xFF)};
    out.write(be, 2);
  }
  if (!out) throw Error(ErrorCode::io, "short write to '" + path.string() + "'");
}

}  // namespace chromex
