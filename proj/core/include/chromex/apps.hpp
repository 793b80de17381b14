#pragma once

#include <functional>

#include "chromex/color.hpp"
#include "chromex/image.hpp"

namespace chromex {

using ColormapExtractor = std::function<Colormap(const RgbImage&)>;

/// Color design transfer with known colormaps: every foreground pixel of the target is
/// assigned to its nearest c_tgt color in normalized Lab and moved to the c_ref color with
/// the same index, keeping its Lab offset from the assigned color. The background and
/// black-like pixels are untouched. Both maps must be discrete with c_tgt no longer than c_ref.
RgbImage transfer(const RgbImage& target, const Colormap& c_ref, const Colormap& c_tgt);

/// Extracts both colormaps with the given extractor, then transfers.
RgbImage transfer(const RgbImage& reference, const RgbImage& target, const ColormapExtractor& extract);

/// Exponent of the slider warp: ln(0.5) / ln(p) with p clamped to [0.01, 0.99].
double remap_gamma(double p);

/// Resamples a continuous colormap at t^gamma so slider position p lands on the midpoint color.
Colormap remap(const Colormap& c, double p);

/// Re-encodes an image from one colormap to another of the same kind. Continuous: each
/// foreground pixel's position along old's polyline is sampled from new, keeping the
/// pixel's offset from the polyline. Discrete: substitution as in transfer.
RgbImage recolor_image(const RgbImage& img, const Colormap& old_map, const Colormap& new_map);

}  // namespace chromex
