#include "chromex/apps.hpp"

#include <cmath>
#include <limits>
#include <unordered_map>

#include "chromex/error.hpp"
#include "chromex/histogram.hpp"

namespace chromex {

namespace {

LabColor operator+(const LabColor& x, const LabColor& y) { return {x.L + y.L, x.a + y.a, x.b + y.b}; }
LabColor operator-(const LabColor& x, const LabColor& y) { return {x.L - y.L, x.a - y.a, x.b - y.b}; }

double norm_sq(const LabColor& x, const LabColor& y) {
  const NormLab p = normalize_lab(x);
  const NormLab q = normalize_lab(y);
  return (p.l - q.l) * (p.l - q.l) + (p.a - q.a) * (p.a - q.a) + (p.b - q.b) * (p.b - q.b);
}

std::uint32_t pack(Rgb8 c) {
  return (static_cast<std::uint32_t>(c.r) << 16) | (static_cast<std::uint32_t>(c.g) << 8) | c.b;
}

/// Applies fn to every distinct foreground color once.
template <typename Fn>
RgbImage map_foreground(const RgbImage& img, Fn&& fn) {
  const ForegroundMask mask(img);
  RgbImage out = img;
  std::unordered_map<std::uint32_t, Rgb8> cache;
  for (Rgb8& px : out.pixels()) {
    const auto [it, fresh] = cache.try_emplace(pack(px), px);
    if (fresh) {
      const LabColor lab = srgb_to_lab(px);
      if (mask.keep(px, lab)) it->second = lab_to_srgb(fn(lab));
    }
    px = it->second;
  }
  return out;
}

std::size_t nearest_index(const std::vector<LabColor>& colors, const LabColor& lab) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < colors.size(); ++i) {
    const double d = norm_sq(colors[i], lab);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

RgbImage substitute(const RgbImage& img, const Colormap& to, const Colormap& from) {
  return map_foreground(img, [&](const LabColor& lab) {
    const std::size_t j = nearest_index(from.colors, lab);
    return to.colors[j] + (lab - from.colors[j]);
  });
}

struct PolylinePoint {
  double t;          // position in [0, 1], in index units
  LabColor closest;
};

PolylinePoint project(const std::vector<LabColor>& colors, const LabColor& lab) {
  const NormLab q = normalize_lab(lab);
  PolylinePoint best{0.0, colors.front()};
  double best_d = std::numeric_limits<double>::infinity();
  const double last = static_cast<double>(colors.size() - 1);
  for (std::size_t i = 0; i + 1 < colors.size(); ++i) {
    const NormLab p0 = normalize_lab(colors[i]);
    const NormLab p1 = normalize_lab(colors[i + 1]);
    const double dl = p1.l - p0.l;
    const double da = p1.a - p0.a;
    const double db = p1.b - p0.b;
    const double len2 = dl * dl + da * da + db * db;
    double f = 0.0;
    if (len2 > 0.0) {
      f = std::clamp(((q.l - p0.l) * dl + (q.a - p0.a) * da + (q.b - p0.b) * db) / len2, 0.0, 1.0);
    }
    const double el = p0.l + f * dl - q.l;
    const double ea = p0.a + f * da - q.a;
    const double eb = p0.b + f * db - q.b;
    const double d = el * el + ea * ea + eb * eb;
    if (d < best_d) {
      best_d = d;
      const LabColor& c0 = colors[i];
      const LabColor& c1 = colors[i + 1];
      best = {(static_cast<double>(i) + f) / last,
              {c0.L + f * (c1.L - c0.L), c0.a + f * (c1.a - c0.a), c0.b + f * (c1.b - c0.b)}};
    }
  }
  return best;
}

void require_discrete(const Colormap& c, const char* what) {
  c.validate();
  if (c.is_continuous()) {
    throw Error(ErrorCode::kind_mismatch, std::string(what) + " colormap must be discrete");
  }
}

}  // namespace

RgbImage transfer(const RgbImage& target, const Colormap& c_ref, const Colormap& c_tgt) {
  require_discrete(c_ref, "reference");
  require_discrete(c_tgt, "target");
  if (c_tgt.size() > c_ref.size()) {
    throw Error(ErrorCode::invalid_argument, "target has " + std::to_string(c_tgt.size()) +
                                                 " colors but the reference only " +
                                                 std::to_string(c_ref.size()));
  }
  return substitute(target, c_ref, c_tgt);
}

RgbImage transfer(const RgbImage& reference, const RgbImage& target, const ColormapExtractor& extract) {
  return transfer(target, extract(reference), extract(target));
}

double remap_gamma(double p) {
  if (std::isnan(p)) throw Error(ErrorCode::invalid_argument, "slider position is not a number");
  return std::log(0.5) / std::log(std::clamp(p, 0.01, 0.99));
}

Colormap remap(const Colormap& c, double p) {
  c.validate();
  if (!c.is_continuous()) throw Error(ErrorCode::kind_mismatch, "remapping needs a continuous colormap");
  const double gamma = remap_gamma(p);
  Colormap out{ColormapKind::continuous, {}, c.name};
  out.colors.reserve(kContinuousSize);
  for (std::size_t i = 0; i < kContinuousSize; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(kContinuousSize - 1);
    out.colors.push_back(sample(c, gamma == 1.0 ? t : std::pow(t, gamma)));
  }
  return out;
}

RgbImage recolor_image(const RgbImage& img, const Colormap& old_map, const Colormap& new_map) {
  old_map.validate();
  new_map.validate();
  if (old_map.kind != new_map.kind) {
    throw Error(ErrorCode::kind_mismatch, "old and new colormaps differ in kind");
  }
  if (!old_map.is_continuous()) {
    if (new_map.size() < old_map.size()) {
      throw Error(ErrorCode::invalid_argument, "new colormap has fewer colors than the old one");
    }
    return substitute(img, new_map, old_map);
  }
  return map_foreground(img, [&](const LabColor& lab) {
    const PolylinePoint p = project(old_map.colors, lab);
    return sample(new_map, p.t) + (lab - p.closest);
  });
}

}  // namespace chromex
