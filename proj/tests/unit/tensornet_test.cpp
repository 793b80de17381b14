#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "chromex/chartgen.hpp"
#include "chromex/colormap_io.hpp"
#include "chromex/error.hpp"
#include "chromex/tensornet.hpp"

namespace chromex {
namespace {

namespace fs = std::filesystem;

template <typename T>
Tensor<T> random_tensor(int c, int h, int w, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor<T> t(c, h, w);
  for (T& v : t.data) v = static_cast<T>(u(rng));
  return t;
}

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

/// Direct nested-loop convolution, the oracle for the GEMM path.
Tensor<double> direct_conv(const Tensor<double>& in, const std::vector<double>& w, int cout,
                           const ConvGeometry& g) {
  const int k = g.kernel;
  const int span = g.dilation * (k - 1) + 1;
  const int ho = (in.h + 2 * g.padding - span) / g.stride + 1;
  const int wo = (in.w + 2 * g.padding - span) / g.stride + 1;
  Tensor<double> out(cout, ho, wo);
  for (int co = 0; co < cout; ++co) {
    for (int oy = 0; oy < ho; ++oy) {
      for (int ox = 0; ox < wo; ++ox) {
        double s = 0.0;
        for (int ci = 0; ci < in.c; ++ci) {
          for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
              const int iy = oy * g.stride - g.padding + ky * g.dilation;
              const int ix = ox * g.stride - g.padding + kx * g.dilation;
              if (iy < 0 || iy >= in.h || ix < 0 || ix >= in.w) continue;
              s += w[((static_cast<std::size_t>(co) * in.c + ci) * k + ky) * k + kx] * in.at(ci, iy, ix);
            }
          }
        }
        out.at(co, oy, ox) = s;
      }
    }
  }
  return out;
}

NetworkWeights zero_weights(const NetConfig& config) {
  NetworkWeights w;
  w.config = config;
  w.params = parameter_layout(config);
  return w;
}

HistogramMap chart_histogram(const std::string& cmap_name, ChartType type, std::uint64_t seed) {
  const Colormap& cmap = find_colormap(cmap_name);
  ChartStyle style;
  style.type = type;
  DataSpec spec;
  spec.kind = type == ChartType::scatter ? Distribution::linear : Distribution::uniform;
  spec.n_categories = cmap.is_continuous() ? 5 : static_cast<int>(cmap.size());
  spec.seed = seed;
  return image_to_histogram_map(render_chart(style, sample_data(spec), cmap));
}

TrainingSample chart_sample(const std::string& cmap_name, ChartType type, std::uint64_t seed,
                            const NetConfig& config) {
  const Colormap& cmap = find_colormap(cmap_name);
  return {prepare_input<float>(chart_histogram(cmap_name, type, seed), config),
          legend_target(to_legend_image(cmap))};
}

// --- conv2d ----------------------------------------------------------------

TEST(Conv2d, IdentityOneByOne) {
  const Tensor<float> in(1, 1, 1, 3.5f);
  const float w = 1.0f;
  const Tensor<float> out = conv2d(in, &w, static_cast<const float*>(nullptr), 1, {1, 1, 1, 0});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out.data[0], 3.5f);
}

TEST(Conv2d, AllOnesCenterIsNine) {
  const Tensor<float> in(1, 3, 3, 1.0f);
  const std::vector<float> w(9, 1.0f);
  const Tensor<float> out = conv2d(in, w.data(), static_cast<const float*>(nullptr), 1, {3, 1, 1, 1});
  ASSERT_EQ(out.h, 3);
  ASSERT_EQ(out.w, 3);
  EXPECT_EQ(out.at(0, 1, 1), 9.0f);
  EXPECT_EQ(out.at(0, 0, 0), 4.0f);
  EXPECT_EQ(out.at(0, 0, 1), 6.0f);
}

TEST(Conv2d, DilationSpreadsDeltaAtTwoPixelSpacing) {
  Tensor<double> in(1, 9, 9);
  in.at(0, 4, 4) = 1.0;
  std::vector<double> w(9);
  for (int i = 0; i < 9; ++i) w[static_cast<std::size_t>(i)] = i + 1;
  const ConvGeometry g{3, 1, 2, 2};
  const Tensor<double> out = conv2d(in, w.data(), static_cast<const double*>(nullptr), 1, g);
  EXPECT_EQ(out, direct_conv(in, w, 1, g));
  for (int y = 0; y < 9; ++y) {
    for (int x = 0; x < 9; ++x) {
      const bool tap = (y == 2 || y == 4 || y == 6) && (x == 2 || x == 4 || x == 6);
      if (!tap) {
        EXPECT_EQ(out.at(0, y, x), 0.0) << y << "," << x;
        continue;
      }
      // Cross-correlation flips the kernel around the delta.
      const int ky = (4 - y) / 2 + 1;
      const int kx = (4 - x) / 2 + 1;
      EXPECT_EQ(out.at(0, y, x), w[static_cast<std::size_t>(ky * 3 + kx)]);
    }
  }
}

TEST(Conv2d, MatchesDirectOracleAcrossGeometries) {
  const Tensor<double> in = random_tensor<double>(3, 11, 13, 7);
  const std::vector<ConvGeometry> geoms{{3, 1, 1, 1}, {3, 2, 1, 1}, {3, 1, 4, 4}, {1, 1, 1, 0},
                                        {3, 2, 2, 0}, {1, 2, 1, 0}};
  for (const auto& g : geoms) {
    const auto w = random_vector(static_cast<std::size_t>(4 * 3 * g.kernel * g.kernel), 11);
    const std::vector<double> b{0.1, -0.2, 0.3, 0.0};
    Tensor<double> expected = direct_conv(in, w, 4, g);
    for (int co = 0; co < 4; ++co) {
      for (int i = 0; i < expected.h * expected.w; ++i) expected.channel(co)[i] += b[static_cast<std::size_t>(co)];
    }
    const Tensor<double> got = conv2d(in, w.data(), b.data(), 4, g);
    ASSERT_EQ(got.h, expected.h);
    ASSERT_EQ(got.w, expected.w);
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got.data[i], expected.data[i], 1e-12);
  }
}

TEST(Conv2d, EmptyOutputIsShapeMismatch) {
  const Tensor<float> in(1, 2, 2);
  const std::vector<float> w(9, 1.0f);
  try {
    conv2d(in, w.data(), static_cast<const float*>(nullptr), 1, {3, 1, 1, 0});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::shape_mismatch);
  }
}

// --- aspp ------------------------------------------------------------------

AsppWeights<double> filled_aspp(const std::vector<int>& rates, int c, int cin, bool pointwise,
                                double value) {
  AsppWeights<double> w;
  for (std::size_t r = 0; r < rates.size(); ++r) {
    w.branch_w.emplace_back(static_cast<std::size_t>(c * cin * 9), value);
    w.branch_b.emplace_back(static_cast<std::size_t>(c), 0.0);
  }
  if (pointwise) {
    w.pointwise_w.assign(static_cast<std::size_t>(c * cin), value);
    w.pointwise_b.assign(static_cast<std::size_t>(c), 0.0);
  }
  const int branches = static_cast<int>(rates.size()) + (pointwise ? 1 : 0);
  w.fuse_w.assign(static_cast<std::size_t>(c * branches * c), value);
  w.fuse_b.assign(static_cast<std::size_t>(c), 0.0);
  return w;
}

TEST(Aspp, ZeroWeightsGiveZeroOutput) {
  const std::vector<int> rates{1, 2, 4, 8};
  const Tensor<double> in = random_tensor<double>(3, 12, 12, 3);
  const Tensor<double> out = aspp(in, rates, 3, 3, filled_aspp(rates, 3, 3, true, 0.0));
  ASSERT_EQ(out.c, 3);
  for (double v : out.data) EXPECT_EQ(v, 0.0);
}

TEST(Aspp, SingleRateOneBranchEqualsConv) {
  const Tensor<double> in = random_tensor<double>(2, 8, 8, 5);
  AsppWeights<double> w;
  w.branch_w.push_back(random_vector(2 * 2 * 9, 9));
  w.branch_b.push_back({0.05, -0.1});
  w.fuse_w = {1.0, 0.0, 0.0, 1.0};  // identity fusion
  w.fuse_b = {0.0, 0.0};
  const Tensor<double> out = aspp(in, {1}, 2, 2, w);
  Tensor<double> ref = conv2d(in, w.branch_w[0].data(), w.branch_b[0].data(), 2, {3, 1, 1, 1});
  for (double& v : ref.data) v = std::max(v, 0.0);
  ASSERT_EQ(out.size(), ref.size());
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_NEAR(out.data[i], ref.data[i], 1e-12);
}

TEST(Aspp, DeltaInfluencesRadiusEight) {
  const std::vector<int> rates{1, 2, 4, 8};
  Tensor<double> in(1, 33, 33);
  in.at(0, 16, 16) = 1.0;
  const Tensor<double> out = aspp(in, rates, 1, 1, filled_aspp(rates, 1, 1, true, 1.0));
  int max_radius = 0;
  for (int y = 0; y < 33; ++y) {
    for (int x = 0; x < 33; ++x) {
      if (out.at(0, y, x) != 0.0) max_radius = std::max({max_radius, std::abs(y - 16), std::abs(x - 16)});
    }
  }
  EXPECT_EQ(max_radius, 8);
  EXPECT_GT(out.at(0, 16 + 8, 16 - 8), 0.0);
  EXPECT_EQ(out.at(0, 16 + 3, 16), 0.0);  // no rate reaches offset 3
}

TEST(Aspp, MismatchedBranchWeightsThrow) {
  const std::vector<int> rates{1, 2};
  const Tensor<double> in(3, 6, 6);
  try {
    aspp(in, rates, 2, 2, filled_aspp(rates, 2, 2, true, 1.0));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::shape_mismatch);
  }
}

// --- configs and forward ----------------------------------------------------

TEST(NetConfig, RejectsBrokenShapes) {
  NetConfig c = desk_config();
  c.stage_channels = {16, 32, 64};
  EXPECT_THROW(validate_config(c), Error);
  c = desk_config();
  c.stage_channels = {16, 32, 48, 128};
  EXPECT_THROW(validate_config(c), Error);
  c = desk_config();
  c.input_size = 96;
  EXPECT_THROW(validate_config(c), Error);
  EXPECT_NO_THROW(validate_config(full_config()));
  EXPECT_NO_THROW(validate_config(tiny_config()));
}

TEST(NetConfig, DeskParameterCount) {
  const auto w = init_weights(desk_config());
  EXPECT_GT(w.parameter_count(), 1'000'000u);
  EXPECT_LT(w.parameter_count(), 1'500'000u);
  NetConfig off = desk_config();
  off.aspp_enabled = false;
  EXPECT_LT(init_weights(off).parameter_count(), w.parameter_count() / 2);
}

TEST(Forward, ZeroWeightsGiveHalfEverywhere) {
  const HistogramMap map = chart_histogram("Set1_3", ChartType::pie, 1);
  for (const NetConfig& c : {tiny_config(), desk_config()}) {
    const Tensor<float> out = forward(zero_weights(c), map);
    ASSERT_EQ(out.c, 3);
    ASSERT_EQ(out.h, kOutRows);
    ASSERT_EQ(out.w, kOutCols);
    for (float v : out.data) ASSERT_EQ(v, 0.5f);
  }
}

TEST(Forward, ShapeIndependentOfInputSize) {
  const HistogramMap map = chart_histogram("viridis", ChartType::heatmap, 2);
  NetConfig full = full_config();
  full.stage_channels = {4, 8, 16, 32};  // full resolution, slim channels
  for (const NetConfig& c : {full, desk_config(), tiny_config()}) {
    const Tensor<float> out = forward(init_weights(c), map);
    EXPECT_EQ(out.c, 3);
    EXPECT_EQ(out.h, 10);
    EXPECT_EQ(out.w, 256);
    for (float v : out.data) {
      EXPECT_GT(v, 0.0f);
      EXPECT_LT(v, 1.0f);
    }
  }
}

TEST(Forward, Deterministic) {
  const HistogramMap map = chart_histogram("tab10_5", ChartType::grouped_bar, 3);
  const NetworkWeights w = init_weights(desk_config());
  EXPECT_EQ(forward(w, map), forward(w, map));
}

TEST(Forward, PoolsHistogramByAveraging) {
  HistogramMap map;
  map.at(0, 0) = 1.0f;
  map.at(1, 1) = 1.0f;
  const Tensor<double> in = prepare_input<double>(map, desk_config());
  EXPECT_EQ(in.h, 128);
  EXPECT_DOUBLE_EQ(in.at(0, 0, 0), 0.5);
  EXPECT_EQ(prepare_input<double>(map, full_config()).at(0, 1, 1), 1.0);
}

TEST(Forward, WrongWeightsForConfigThrow) {
  NetworkWeights w = init_weights(tiny_config());
  w.params.pop_back();
  try {
    Network<float> net(w);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::config_mismatch);
  }
}

TEST(Forward, PredictionImageRoundTripsLegend) {
  const Colormap& cmap = find_colormap("viridis");
  const ColormapImage legend = to_legend_image(cmap);
  const ColormapImage back = prediction_to_image(legend_target(legend));
  for (int c = 0; c < 256; ++c) {
    const Rgb8 a = legend.at(5, c);
    const Rgb8 b = back.at(5, c);
    EXPECT_LE(std::abs(int(a.r) - int(b.r)), 1);
    EXPECT_LE(std::abs(int(a.g) - int(b.g)), 1);
    EXPECT_LE(std::abs(int(a.b) - int(b.b)), 1);
  }
}

// --- loss --------------------------------------------------------------------

TEST(L2Loss, Examples) {
  const Tensor<float> x = random_tensor<float>(3, 10, 256, 1, 0.0, 1.0);
  EXPECT_EQ(l2_loss(x, x), 0.0);
  EXPECT_DOUBLE_EQ(l2_loss(Tensor<float>(3, 10, 256, 0.0f), Tensor<float>(3, 10, 256, 1.0f)), 3.0);
  const Tensor<float> y = random_tensor<float>(3, 10, 256, 2, 0.0, 1.0);
  double oracle = 0.0;
  for (int r = 0; r < 10; ++r) {
    for (int c = 0; c < 256; ++c) {
      double d2 = 0.0;
      for (int ch = 0; ch < 3; ++ch) {
        const double d = double(x.at(ch, r, c)) - double(y.at(ch, r, c));
        d2 += d * d;
      }
      oracle += d2;
    }
  }
  oracle /= 2560.0;
  EXPECT_NEAR(l2_loss(x, y), oracle, 1e-5 * oracle);
  EXPECT_THROW(l2_loss(x, Tensor<float>(3, 10, 255)), Error);
}

// --- backward ------------------------------------------------------------------

TEST(Backward, ZeroLossGivesZeroGradients) {
  const NetworkWeights w = init_weights(tiny_config());
  const Network<double> net(w);
  const Tensor<double> in = random_tensor<double>(1, 16, 16, 4, 0.0, 1.0);
  const Tensor<double> target = net.forward(in);
  auto grads = net.zero_gradients();
  EXPECT_EQ(net.backward(in, target, grads), 0.0);
  for (const auto& g : grads) {
    for (double v : g) ASSERT_EQ(v, 0.0);
  }
}

double gradient_check(NetConfig config, std::uint64_t seed) {
  config.seed = seed;
  // Zero biases on dead inputs put pre-activations exactly on the ReLU kink, where the
  // central difference straddles it; evaluate at a generic point instead.
  NetworkWeights w = init_weights(config);
  std::mt19937_64 bias_rng(seed + 3);
  std::uniform_real_distribution<double> bias_u(-0.1, 0.1);
  for (auto& p : w.params) {
    if (p.shape.size() == 1) {
      for (float& v : p.data) v = static_cast<float>(bias_u(bias_rng));
    }
  }
  Network<double> net(w);
  const Tensor<double> in = random_tensor<double>(1, config.input_size, config.input_size, seed + 1, 0.0, 1.0);
  const Tensor<double> target = random_tensor<double>(3, kOutRows, kOutCols, seed + 2, 0.0, 1.0);
  auto grads = net.zero_gradients();
  net.backward(in, target, grads);

  std::vector<std::pair<std::size_t, std::size_t>> index;
  for (std::size_t i = 0; i < net.params().size(); ++i) {
    for (std::size_t k = 0; k < net.params()[i].size(); ++k) index.emplace_back(i, k);
  }
  std::mt19937_64 rng(seed);
  std::shuffle(index.begin(), index.end(), rng);
  index.resize(200);

  const double h = 1e-5;
  double worst = 0.0;
  for (const auto& [i, k] : index) {
    double& p = net.params()[i][k];
    const double saved = p;
    p = saved + h;
    const double up = l2_loss(net.forward(in), target);
    p = saved - h;
    const double down = l2_loss(net.forward(in), target);
    p = saved;
    const double numeric = (up - down) / (2 * h);
    const double analytic = grads[i][k];
    // The difference quotient carries about 1e-10 of roundoff; the floor keeps vanishing
    // gradients from dividing by it (they are then held to 1e-9 absolute).
    const double scale = std::max({std::abs(numeric), std::abs(analytic), 1e-4});
    worst = std::max(worst, std::abs(numeric - analytic) / scale);
  }
  return worst;
}

TEST(Backward, GradientCheckTinyConfig) {
  EXPECT_LE(gradient_check(tiny_config(), 17), 1e-5);
}

TEST(Backward, GradientCheckWithoutAsppAndWithResidual) {
  NetConfig c = tiny_config();
  c.aspp_enabled = false;
  EXPECT_LE(gradient_check(c, 23), 1e-5);
  c = tiny_config();
  c.residual = true;
  EXPECT_LE(gradient_check(c, 29), 1e-5);
}

TEST(Backward, SumRule) {
  const Network<double> net(init_weights(tiny_config()));
  const Tensor<double> a = random_tensor<double>(1, 16, 16, 31, 0.0, 1.0);
  const Tensor<double> b = random_tensor<double>(1, 16, 16, 32, 0.0, 1.0);
  const Tensor<double> ta = random_tensor<double>(3, 10, 256, 33, 0.0, 1.0);
  const Tensor<double> tb = random_tensor<double>(3, 10, 256, 34, 0.0, 1.0);
  auto ga = net.zero_gradients();
  auto gb = net.zero_gradients();
  auto gab = net.zero_gradients();
  net.backward(a, ta, ga);
  net.backward(b, tb, gb);
  net.backward(a, ta, gab);
  net.backward(b, tb, gab);
  for (std::size_t i = 0; i < ga.size(); ++i) {
    for (std::size_t k = 0; k < ga[i].size(); ++k) {
      ASSERT_NEAR(gab[i][k], ga[i][k] + gb[i][k], 1e-12 * (1.0 + std::abs(gab[i][k])));
    }
  }
}

// --- Adam ----------------------------------------------------------------------

TEST(Adam, ZeroGradientLeavesParameters) {
  ParamBuffers<float> p{{1.0f, -2.0f}, {3.0f}};
  const auto before = p;
  AdamState s;
  adam_step(p, {{0.0f, 0.0f}, {0.0f}}, s, {});
  EXPECT_EQ(p, before);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  ParamBuffers<float> p{{1.0f, 1.0f, 1.0f}};
  AdamState s;
  adam_step(p, {{0.5f, -3.0f, 1e-3f}}, s, {1e-3});
  EXPECT_NEAR(p[0][0], 1.0f - 1e-3f, 1e-7);
  EXPECT_NEAR(p[0][1], 1.0f + 1e-3f, 1e-7);
  EXPECT_NEAR(p[0][2], 1.0f - 1e-3f, 1e-6);
}

TEST(Adam, Deterministic) {
  const ParamBuffers<float> g{{0.3f, -0.1f}};
  ParamBuffers<float> p1{{0.0f, 0.0f}};
  auto p2 = p1;
  AdamState s1;
  AdamState s2;
  for (int i = 0; i < 5; ++i) {
    adam_step(p1, g, s1, {});
    adam_step(p2, g, s2, {});
  }
  EXPECT_EQ(p1, p2);
  EXPECT_EQ(s1.step, 5);
}

// --- training --------------------------------------------------------------------

TEST(Train, MemorizesOneSample) {
  const NetConfig config = tiny_config();
  const std::vector<TrainingSample> one{chart_sample("Dark2_4", ChartType::pie, 5, config)};
  TrainOptions opts;
  opts.iterations = 2000;
  const TrainResult r = train(one, config, opts);
  ASSERT_EQ(r.curve.size(), 20u);
  EXPECT_LT(r.weights.meta.final_loss, 1e-3);
  EXPECT_LT(evaluate_loss(r.weights, one), 1e-3);
  for (std::size_t i = 1; i < r.curve.size(); ++i) {
    EXPECT_LE(r.curve[i].loss, r.curve[i - 1].loss) << "window " << i;
  }
}

TEST(Train, SameSeedSameCurveAcrossJobCounts) {
  const NetConfig config = tiny_config();
  std::vector<TrainingSample> samples;
  for (int i = 0; i < 5; ++i) {
    samples.push_back(chart_sample(i % 2 ? "viridis" : "Set2_6", i % 2 ? ChartType::heatmap : ChartType::stacked_bar,
                                   static_cast<std::uint64_t>(i), config));
  }
  TrainOptions opts;
  opts.iterations = 30;
  opts.lr = 1e-3;
  opts.batch = 3;
  opts.log_every = 10;
  const TrainResult a = train(samples, config, opts, &samples);
  const TrainResult b = train(samples, config, opts, &samples);
  opts.jobs = 3;
  const TrainResult c = train(samples, config, opts, &samples);
  EXPECT_EQ(a.curve, b.curve);
  EXPECT_EQ(a.weights, b.weights);
  EXPECT_EQ(a.curve, c.curve);
  EXPECT_EQ(a.weights, c.weights);
  ASSERT_EQ(a.curve.size(), 3u);
  EXPECT_TRUE(a.curve[0].eval_loss.has_value());
  EXPECT_EQ(a.weights.meta.batch, 3);
}

TEST(Train, ZeroIterationsReturnsInitialization) {
  const NetConfig config = tiny_config();
  const std::vector<TrainingSample> one{chart_sample("Set1_3", ChartType::pie, 1, config)};
  TrainOptions opts;
  opts.iterations = 0;
  const TrainResult r = train(one, config, opts);
  EXPECT_EQ(r.weights, init_weights(config));
  EXPECT_TRUE(r.curve.empty());
}

TEST(Train, RejectsEmptyAndMismatchedSamples) {
  TrainOptions opts;
  try {
    train({}, tiny_config(), opts);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::empty_input);
  }
  const std::vector<TrainingSample> wrong{chart_sample("Set1_3", ChartType::pie, 1, desk_config())};
  EXPECT_THROW(train(wrong, tiny_config(), opts), Error);
}

TEST(Train, LossCsv) {
  const fs::path path = fs::temp_directory_path() / "chromex_loss.csv";
  write_loss_csv(path, {{100, 0.5, std::nullopt}, {200, 0.25, 0.3}});
  std::ifstream in(path);
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_EQ(text, "iteration,loss,eval_loss\n100,0.5,\n200,0.25,0.3\n");
}

// --- serialization -----------------------------------------------------------------

TEST(Weights, SaveLoadSaveIsByteIdentical) {
  NetworkWeights w = init_weights(tiny_config());
  w.meta = {1234, 0.0123456789, 1e-4, 8, 1800};
  const fs::path a = fs::temp_directory_path() / "chromex_w_a.bin";
  const fs::path b = fs::temp_directory_path() / "chromex_w_b.bin";
  save_weights(a, w);
  const NetworkWeights loaded = load_weights(a);
  EXPECT_EQ(loaded, w);
  save_weights(b, loaded);
  std::ifstream fa(a, std::ios::binary);
  std::ifstream fb(b, std::ios::binary);
  const std::string sa((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
  const std::string sb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
  EXPECT_EQ(sa, sb);
  EXPECT_EQ(sa.substr(0, 4), "CXW1");
  EXPECT_EQ(weights_id(w), weights_id(loaded));
  EXPECT_EQ(weights_id(w).size(), 12u);
}

ErrorCode load_error(const std::vector<std::uint8_t>& bytes) {
  try {
    deserialize_weights(bytes);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::invalid_argument;
}

TEST(Weights, CorruptionIsDetected) {
  const auto good = serialize_weights(init_weights(tiny_config()));
  auto bad_magic = good;
  bad_magic[0] = 'X';
  EXPECT_EQ(load_error(bad_magic), ErrorCode::corrupt);
  auto bad_version = good;
  bad_version[4] = 9;
  EXPECT_EQ(load_error(bad_version), ErrorCode::version_mismatch);
  auto truncated = good;
  truncated.resize(good.size() - 5);
  EXPECT_EQ(load_error(truncated), ErrorCode::corrupt);
  auto trailing = good;
  trailing.push_back(0);
  EXPECT_EQ(load_error(trailing), ErrorCode::corrupt);
  EXPECT_EQ(load_error({}), ErrorCode::corrupt);
}

TEST(Weights, BiggerConfigRefusesSmallerExpectation) {
  const fs::path path = fs::temp_directory_path() / "chromex_w_big.bin";
  save_weights(path, init_weights(desk_config()));
  try {
    load_weights(path, tiny_config());
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::config_mismatch);
  }
  EXPECT_NO_THROW(load_weights(path, desk_config()));
}

TEST(Weights, MissingFileIsNotFound) {
  try {
    load_weights(fs::temp_directory_path() / "chromex_no_such_weights.bin");
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::not_found);
  }
}

}  // namespace
}  // namespace chromex
