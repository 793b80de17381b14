#include <benchmark/benchmark.h>

#include <random>

#include "chromex/chartgen.hpp"
#include "chromex/colormap_io.hpp"
#include "chromex/eval.hpp"
#include "chromex/histogram.hpp"
#include "chromex/pipeline.hpp"
#include "chromex/refine.hpp"
#include "chromex/tensornet.hpp"

namespace {

using namespace chromex;

RgbImage chart(ChartType type, const std::string& cmap) {
  ChartStyle style;
  style.type = type;
  DataSpec spec;
  spec.n_categories = 6;
  spec.n_points = 32;
  spec.seed = 1;
  return render_chart(style, sample_data(spec), find_colormap(cmap));
}

void BM_Histogram(benchmark::State& state) {
  const RgbImage img = chart(ChartType::heatmap, "viridis");
  for (auto _ : state) benchmark::DoNotOptimize(image_to_histogram_map(img));
  state.SetItemsProcessed(state.iterations() * img.width() * img.height());
}
BENCHMARK(BM_Histogram);

void BM_Forward(benchmark::State& state, NetConfig config) {
  const NetworkWeights w = init_weights(config);
  const HistogramMap map = image_to_histogram_map(chart(ChartType::pie, "Set2_6"));
  for (auto _ : state) benchmark::DoNotOptimize(forward(w, map));
}
BENCHMARK_CAPTURE(BM_Forward, tiny, tiny_config());
BENCHMARK_CAPTURE(BM_Forward, desk, desk_config());

void BM_Refine(benchmark::State& state) {
  const ColormapImage legend = to_legend_image(find_colormap(state.range(0) ? "viridis" : "tab10_10"));
  for (auto _ : state) benchmark::DoNotOptimize(refine(legend));
}
BENCHMARK(BM_Refine)->Arg(0)->Arg(1);

void BM_Dtw(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  std::vector<LabColor> a(static_cast<std::size_t>(state.range(0)));
  std::vector<LabColor> b(a.size());
  for (auto& c : a) c = {u(rng), u(rng) - 50, u(rng) - 50};
  for (auto& c : b) c = {u(rng), u(rng) - 50, u(rng) - 50};
  for (auto _ : state) benchmark::DoNotOptimize(dtw_distance(a, b));
}
BENCHMARK(BM_Dtw)->Arg(10)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
