#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "chromex/color.hpp"
#include "chromex/histogram.hpp"

namespace chromex {

struct RefineConfig {
  double filter_threshold = 0.01;  // bins below this fraction of the peak bin are dropped
  double dbscan_eps = 0.05;        // neighborhood radius in normalized Lab
  int dbscan_min = 4;              // pixel weight a neighborhood needs to be a core
  int kind_threshold = 32;         // more surviving bins than this means continuous
  int knn_k = 10;                  // neighbors per point in the eigenmap graph
  double gap_threshold = 14.0;     // Lab distance of a gap between legend plateaus

  /// Throws invalid_argument unless every field is positive and filter_threshold < 1.
  void validate() const;
};

/// Occupied Lab bins of the prediction (no background or black filtering) whose weight is
/// at least filter_threshold of the peak. Throws empty_input for an all-zero prediction.
std::vector<WeightedColor> prediction_bins(const ColormapImage& pred, const RefineConfig& cfg = {});

/// Discrete when at most kind_threshold bins survive the filter. Otherwise the legend's
/// column profile (per-column median Lab) decides: a discrete legend is a few plateaus
/// separated by jumps, so the second-largest edge of the profile's minimum spanning tree is
/// at least gap_threshold; a ramp is a connected curve whose edges stay short.
ColormapKind classify_kind(const ColormapImage& pred, const RefineConfig& cfg = {});

struct ColorCluster {
  std::vector<WeightedColor> members;  // canonical (L, a, b) order
  LabColor prominent;                  // heaviest member; ties go to lower L, a, b
  std::uint64_t weight = 0;            // summed member weight
};

/// Weighted DBSCAN in normalized Lab. Noise points whose weight is at least a tenth of the
/// heaviest point become singleton clusters; lighter noise is dropped. Clusters are
/// returned in canonical order of their prominent colors, independent of input order.
std::vector<ColorCluster> dbscan_colors(std::span<const WeightedColor> points,
                                        const RefineConfig& cfg = {});

/// Laplacian-eigenmap ordering: the points sorted along the Fiedler vector of a k-NN
/// Gaussian graph, resampled to 256 colors at equal Lab arc length. The output starts at
/// the lower-L end. More than 600 points are first merged on a coarsening Lab grid. Throws
/// insufficient_points for fewer than 3 distinct points.
std::vector<LabColor> laplacian_order(std::span<const WeightedColor> points,
                                      const RefineConfig& cfg = {});

/// Sorts colors by the mean column of the prediction pixels nearest to each. Colors that
/// own no pixel go last, in input order.
std::vector<LabColor> recover_order(std::span<const LabColor> colors, const ColormapImage& pred);

/// Prediction image to final colormap: classification, then clustering (discrete) or
/// eigenmap ordering (continuous), then order recovery from the prediction.
Colormap refine(const ColormapImage& pred, const RefineConfig& cfg = {});

}  // namespace chromex
