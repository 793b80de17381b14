#include "chromex/baselines.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <random>

#include "chromex/error.hpp"
#include "chromex/histogram.hpp"

namespace chromex {

namespace {

double squared(const LabColor& x, const LabColor& y) {
  return (x.L - y.L) * (x.L - y.L) + (x.a - y.a) * (x.a - y.a) + (x.b - y.b) * (x.b - y.b);
}

struct Point {
  LabColor lab;
  double weight;
};

void sort_by_lightness(std::vector<LabColor>& colors) {
  std::sort(colors.begin(), colors.end(), [](const LabColor& x, const LabColor& y) {
    return std::tie(x.L, x.a, x.b) < std::tie(y.L, y.a, y.b);
  });
}

}  // namespace

Colormap palette_extract(const RgbImage& img, int k, std::uint64_t seed) {
  if (k < 1 || k > static_cast<int>(kMaxDiscreteSize)) {
    throw Error(ErrorCode::invalid_argument, "k must be in 1..10");
  }
  if (img.empty()) throw Error(ErrorCode::empty_input, "empty image");
  // Identical pixels contribute identically, so cluster distinct colors weighted by count.
  const ForegroundMask mask(img);
  std::map<Rgb8, std::size_t> counts;
  for (const Rgb8 px : img.pixels()) ++counts[px];
  std::vector<Point> pts;
  for (const auto& [rgb, n] : counts) {
    const LabColor lab = srgb_to_lab(rgb);
    if (mask.keep(rgb, lab)) pts.push_back({lab, static_cast<double>(n)});
  }
  if (pts.empty()) throw Error(ErrorCode::no_foreground, "no foreground pixels");

  Colormap out;
  out.kind = ColormapKind::discrete;
  out.name = "palette";
  if (pts.size() <= static_cast<std::size_t>(k)) {
    for (const auto& p : pts) out.colors.push_back(p.lab);
    sort_by_lightness(out.colors);
    return out;
  }

  std::mt19937_64 rng(seed);
  std::vector<LabColor> centers;
  {
    std::vector<double> w;
    for (const auto& p : pts) w.push_back(p.weight);
    std::discrete_distribution<std::size_t> first(w.begin(), w.end());
    centers.push_back(pts[first(rng)].lab);
    std::vector<double> d2(pts.size(), std::numeric_limits<double>::infinity());
    while (centers.size() < static_cast<std::size_t>(k)) {
      for (std::size_t i = 0; i < pts.size(); ++i) {
        d2[i] = std::min(d2[i], squared(pts[i].lab, centers.back()));
        w[i] = d2[i] * pts[i].weight;
      }
      std::discrete_distribution<std::size_t> next(w.begin(), w.end());
      centers.push_back(pts[next(rng)].lab);
    }
  }

  std::vector<std::size_t> assign(pts.size(), 0);
  for (int iter = 0; iter < 50; ++iter) {
    bool changed = iter == 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      std::size_t best = 0;
      double best_d = squared(pts[i].lab, centers[0]);
      for (std::size_t c = 1; c < centers.size(); ++c) {
        const double d = squared(pts[i].lab, centers[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (assign[i] != best) changed = true;
      assign[i] = best;
    }
    if (!changed) break;
    std::vector<LabColor> sum(centers.size());
    std::vector<double> mass(centers.size(), 0.0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      auto& s = sum[assign[i]];
      s.L += pts[i].weight * pts[i].lab.L;
      s.a += pts[i].weight * pts[i].lab.a;
      s.b += pts[i].weight * pts[i].lab.b;
      mass[assign[i]] += pts[i].weight;
    }
    for (std::size_t c = 0; c < centers.size(); ++c) {
      if (mass[c] > 0.0) centers[c] = {sum[c].L / mass[c], sum[c].a / mass[c], sum[c].b / mass[c]};
    }
  }
  out.colors = std::move(centers);
  sort_by_lightness(out.colors);
  return out;
}

Colormap sequence_extract(const RgbImage& img, const RefineConfig& cfg) {
  cfg.validate();
  std::vector<WeightedColor> bins = foreground_color_bins(img);
  std::uint64_t peak = 0;
  for (const auto& b : bins) peak = std::max(peak, b.weight);
  std::erase_if(bins, [&](const WeightedColor& b) {
    return static_cast<double>(b.weight) < cfg.filter_threshold * static_cast<double>(peak);
  });
  if (bins.size() < 3) {
    throw Error(ErrorCode::insufficient_points, "fewer than 3 foreground colors to order");
  }
  return {ColormapKind::continuous, laplacian_order(bins, cfg), "sequence"};
}

}  // namespace chromex
