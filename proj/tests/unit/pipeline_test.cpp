#include <gtest/gtest.h>

#include <unistd.h>

#include <filesystem>

#include "chromex/colormap_io.hpp"
#include "chromex/error.hpp"
#include "chromex/histogram.hpp"
#include "chromex/pipeline.hpp"

namespace chromex {
namespace {

namespace fs = std::filesystem;

RgbImage pie() {
  ChartStyle style;
  DataSpec spec;
  spec.n_categories = 4;
  spec.seed = 3;
  return render_chart(style, sample_data(spec), find_colormap("Dark2_4"));
}

TEST(Extractor, ComposesHistogramForwardAndRefine) {
  const NetworkWeights w = init_weights(tiny_config());
  const Extractor ex(w);
  const RgbImage img = pie();
  const ColormapImage pred = ex.predict(img);
  EXPECT_EQ(pred.pixels, prediction_to_image(forward(w, image_to_histogram_map(img))).pixels);
  const Extraction e = ex.extract(img);
  EXPECT_EQ(e.prediction.pixels, pred.pixels);
  EXPECT_EQ(e.colormap.colors, refine(pred).colors);
  EXPECT_NO_THROW(e.colormap.validate());
  EXPECT_GE(e.seconds, 0.0);
}

TEST(Extractor, NoForegroundAndEmpty) {
  const Extractor ex(init_weights(tiny_config()));
  try {
    ex.extract(RgbImage(32, 32));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::no_foreground);
  }
  EXPECT_THROW(ex.extract(RgbImage(0, 0)), Error);
}

TEST(Extractor, RejectsBadRefineConfig) {
  RefineConfig bad;
  bad.knn_k = 0;
  EXPECT_THROW(Extractor(init_weights(tiny_config()), bad), Error);
}

TEST(Methods, NamesRoundTrip) {
  for (const Method m : {Method::cnn, Method::palette, Method::sequence, Method::truth}) {
    EXPECT_EQ(parse_method(method_name(m)), m);
  }
  EXPECT_THROW(parse_method("legend"), Error);
}

TEST(LoadSamples, FollowsSplitAndConfig) {
  const fs::path dir = fs::temp_directory_path() / ("chromex_pipeline_test_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  CorpusConfig cfg;
  cfg.seed = 3;
  cfg.colormaps = {"Set1_3", "viridis"};
  cfg.chart_types = {ChartType::pie, ChartType::heatmap};
  cfg.data = {{Distribution::normal, {}, 20, 3, 0}};
  cfg.data_seeds = 4;
  cfg.test_fraction = 0.25;
  const auto records = generate_corpus(cfg, dir);
  std::size_t train = 0;
  for (const auto& r : records) train += r.split == Split::train;
  const NetConfig net = tiny_config();
  const auto samples = load_samples(records, Split::train, net, 2);
  ASSERT_EQ(samples.size(), train);
  std::size_t k = 0;
  for (const auto& r : records) {
    if (r.split != Split::train) continue;
    const TrainingSample want = make_sample(read_png(r.image_path), record_colormap(r), net);
    EXPECT_EQ(samples[k].input.data, want.input.data);
    EXPECT_EQ(samples[k].target.data, want.target.data);
    ++k;
  }
  EXPECT_EQ(load_samples(records, Split::test, net).size(), records.size() - train);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace chromex
