#pragma once

#include <cstdint>

#include "chromex/color.hpp"
#include "chromex/image.hpp"
#include "chromex/refine.hpp"

namespace chromex {

/// Palette baseline: k-means (k-means++ seeding, at most 50 iterations) over the Lab values
/// of foreground pixels, centroids sorted by ascending L. With k or fewer distinct colors
/// those colors are returned. Throws no_foreground when every pixel is filtered.
Colormap palette_extract(const RgbImage& img, int k = 5, std::uint64_t seed = 1);

/// Sequence baseline: the eigenmap ordering of the filtered foreground histogram, starting
/// at the lower-L end. Throws insufficient_points for fewer than 3 surviving bins.
Colormap sequence_extract(const RgbImage& img, const RefineConfig& cfg = {});

}  // namespace chromex
