#include "chromex/pipeline.hpp"

#include <chrono>

#include "chromex/error.hpp"
#include "chromex/histogram.hpp"
#include "internal/parallel.hpp"

namespace chromex {

Extractor::Extractor(NetworkWeights weights, RefineConfig refine)
    : weights_(std::move(weights)), refine_(refine) {
  validate_config(weights_.config);
  refine_.validate();
}

ColormapImage Extractor::predict(const RgbImage& img) const {
  if (img.empty()) throw Error(ErrorCode::empty_input, "empty image");
  const HistogramMap map = image_to_histogram_map(img);
  if (map.all_zero()) throw Error(ErrorCode::no_foreground, "no foreground colors");
  return prediction_to_image(forward(weights_, map));
}

Extraction Extractor::extract(const RgbImage& img) const {
  const auto start = std::chrono::steady_clock::now();
  Extraction out;
  out.prediction = predict(img);
  out.colormap = refine(out.prediction, refine_);
  out.colormap.name = "cnn";
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

Method parse_method(std::string_view name) {
  if (name == "cnn") return Method::cnn;
  if (name == "palette") return Method::palette;
  if (name == "sequence") return Method::sequence;
  if (name == "truth") return Method::truth;
  throw Error(ErrorCode::invalid_argument, "unknown method '" + std::string(name) + "'");
}

std::string_view method_name(Method m) {
  switch (m) {
    case Method::cnn: return "cnn";
    case Method::palette: return "palette";
    case Method::sequence: return "sequence";
    case Method::truth: return "truth";
  }
  return "unknown";
}

std::vector<TrainingSample> load_samples(const std::vector<ManifestRecord>& records, Split split,
                                         const NetConfig& config, int jobs) {
  std::vector<const ManifestRecord*> picked;
  for (const auto& r : records) {
    if (r.split == split) picked.push_back(&r);
  }
  std::vector<TrainingSample> out(picked.size());
  internal::parallel_for(picked.size(), jobs, [&](std::size_t i) {
    out[i] = make_sample(read_png(picked[i]->image_path), record_colormap(*picked[i]), config);
  });
  return out;
}

}  // namespace chromex
