#pragma once

#include <filesystem>
#include <string_view>
#include <vector>

#include "chromex/chartgen.hpp"
#include "chromex/color.hpp"
#include "chromex/image.hpp"
#include "chromex/refine.hpp"
#include "chromex/tensornet.hpp"

namespace chromex {

struct Extraction {
  Colormap colormap;
  ColormapImage prediction;
  double seconds = 0.0;  // wall time of histogram, forward pass and refinement
};

/// The trained pipeline: histogram, network forward pass, refinement.
/// Immutable after construction, so one instance may serve concurrent callers.
class Extractor {
 public:
  explicit Extractor(NetworkWeights weights, RefineConfig refine = {});

  const NetworkWeights& weights() const noexcept { return weights_; }
  const RefineConfig& refine_config() const noexcept { return refine_; }

  /// Throws no_foreground when the image has no foreground colors.
  ColormapImage predict(const RgbImage& img) const;
  Extraction extract(const RgbImage& img) const;

 private:
  NetworkWeights weights_;
  RefineConfig refine_;
};

enum class Method { cnn, palette, sequence, truth };

/// "cnn", "palette", "sequence" or "truth"; throws invalid_argument otherwise.
Method parse_method(std::string_view name);
std::string_view method_name(Method m);

/// Loads the images of every record in the given split and turns them into network samples.
std::vector<TrainingSample> load_samples(const std::vector<ManifestRecord>& records, Split split,
                                         const NetConfig& config, int jobs = 1);

}  // namespace chromex
