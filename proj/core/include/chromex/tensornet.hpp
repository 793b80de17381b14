#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include "chromex/color.hpp"
#include "chromex/histogram.hpp"

namespace chromex {

/// 64-byte aligned storage. Vectorized reductions peel by address, so fixed alignment
/// keeps results independent of where a buffer happens to be allocated.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};

  AlignedAllocator() noexcept = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlign)); }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlign); }

  template <typename U>
  friend bool operator==(const AlignedAllocator&, const AlignedAllocator<U>&) noexcept {
    return true;
  }
};

template <typename T>
using AlignedVector = std::vector<T, AlignedAllocator<T>>;

/// Per-layer parameter (or gradient) buffers in storage order.
template <typename T>
using ParamBuffers = std::vector<AlignedVector<T>>;

/// Dense (channels, height, width) array.
template <typename T>
struct Tensor {
  int c = 0;
  int h = 0;
  int w = 0;
  AlignedVector<T> data;

  Tensor() = default;
  Tensor(int channels, int height, int width, T fill = T(0))
      : c(channels), h(height), w(width), data(static_cast<std::size_t>(channels) * height * width, fill) {}

  std::size_t size() const noexcept { return data.size(); }
  T& at(int ch, int y, int x) { return data[index(ch, y, x)]; }
  const T& at(int ch, int y, int x) const { return data[index(ch, y, x)]; }
  T* channel(int ch) { return data.data() + static_cast<std::size_t>(ch) * h * w; }
  const T* channel(int ch) const { return data.data() + static_cast<std::size_t>(ch) * h * w; }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::size_t index(int ch, int y, int x) const {
    return (static_cast<std::size_t>(ch) * h + static_cast<std::size_t>(y)) * w +
           static_cast<std::size_t>(x);
  }
};

struct ConvGeometry {
  int kernel = 3;
  int stride = 1;
  int dilation = 1;
  int padding = 1;
};

/// Cross-correlation with zero padding. weight is [cout][cin][k][k], bias has cout entries
/// (nullptr for none). Throws shape_mismatch when the geometry leaves no output.
template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const T* weight, const T* bias, int cout,
                 const ConvGeometry& g);

/// Parallel dilated 3x3 branches (one per rate) plus an optional 1x1 branch, each
/// ReLU-activated, concatenated along channels and fused by a 1x1 convolution (then ReLU).
template <typename T>
struct AsppWeights {
  std::vector<std::vector<T>> branch_w; // 3x3 kernels, one per rate: [c][cin][3][3]
  std::vector<std::vector<T>> branch_b;
  std::vector<T> pointwise_w;            // [c][cin]; empty disables the 1x1 branch
  std::vector<T> pointwise_b;
  std::vector<T> fuse_w;                 // [cout][branches * c]
  std::vector<T> fuse_b;
};

template <typename T>
Tensor<T> aspp(const Tensor<T>& input, const std::vector<int>& rates, int branch_channels,
               int out_channels, const AsppWeights<T>& w);

// ---------------------------------------------------------------------------
// Network

struct NetConfig {
  int input_size = 128;  // 256 = full resolution; smaller sizes average-pool the histogram
  std::vector<int> stage_channels{16, 32, 64, 128};
  std::vector<int> aspp_rates{1, 2, 4, 8};
  bool aspp_enabled = true;
  bool residual = false;  // identity skip around each stage's second convolution
  std::uint64_t seed = 1;

  friend bool operator==(const NetConfig&, const NetConfig&) = default;
};

NetConfig desk_config();
NetConfig full_config();
/// 16x16 input, channels [2,4,8,16]: small enough for finite-difference checks.
NetConfig tiny_config();

/// Throws invalid_argument for configs that violate the stage/shape rules.
void validate_config(const NetConfig& config);

/// JSON form of a config. Parsing starts from "preset" ("desk", "full" or "tiny"; desk when
/// absent) and overrides any field present. Throws invalid_argument on bad input.
std::string net_config_to_json(const NetConfig& config);
NetConfig parse_net_config(std::string_view text);
NetConfig net_config_preset(std::string_view name);

struct ParamTensor {
  std::string name;
  std::vector<int> shape;
  std::vector<float> data;

  friend bool operator==(const ParamTensor&, const ParamTensor&) = default;
};

struct TrainingMeta {
  std::int64_t iterations = 0;
  double final_loss = 0.0;
  double learning_rate = 0.0;
  int batch = 0;
  std::size_t samples = 0;

  friend bool operator==(const TrainingMeta&, const TrainingMeta&) = default;
};

struct NetworkWeights {
  NetConfig config;
  std::vector<ParamTensor> params;
  TrainingMeta meta;

  std::size_t parameter_count() const;
  friend bool operator==(const NetworkWeights&, const NetworkWeights&) = default;
};

/// Parameter names and shapes the config implies, in storage order.
std::vector<ParamTensor> parameter_layout(const NetConfig& config);

/// Kaiming-uniform (fan-in) kernels, zero biases; seeded by config.seed.
NetworkWeights init_weights(const NetConfig& config);

/// Output layout: 3 channels (normalized L, a, b) x 10 rows x 256 columns.
inline constexpr int kOutRows = 10;
inline constexpr int kOutCols = 256;

/// Histogram map as a 1-channel tensor, average-pooled to the config's input size.
template <typename T>
Tensor<T> prepare_input(const HistogramMap& map, const NetConfig& config);

/// Legend image as normalized-Lab channel planes (the regression target).
Tensor<float> legend_target(const ColormapImage& legend);
ColormapImage prediction_to_image(const Tensor<float>& prediction);

/// Flat parameter storage in a chosen precision, with forward and reverse passes.
template <typename T>
class Network {
 public:
  explicit Network(const NetworkWeights& weights);

  const NetConfig& config() const { return config_; }
  ParamBuffers<T>& params() { return params_; }
  const ParamBuffers<T>& params() const { return params_; }

  /// Fresh zero-filled buffers shaped like params().
  ParamBuffers<T> zero_gradients() const;

  Tensor<T> forward(const Tensor<T>& input) const;

  /// Returns the loss of one sample and adds its gradient into grads.
  double backward(const Tensor<T>& input, const Tensor<T>& target,
                  ParamBuffers<T>& grads) const;

  /// Writes the parameters back (rounded to float) into a weights record.
  void export_to(NetworkWeights& weights) const;

 private:
  struct Cache;
  Tensor<T> run(const Tensor<T>& input, Cache* cache) const;

  NetConfig config_;
  ParamBuffers<T> params_;
};

Tensor<float> forward(const NetworkWeights& weights, const HistogramMap& map);

/// Mean over pixels of the squared Euclidean distance between channel vectors.
template <typename T>
double l2_loss(const Tensor<T>& x, const Tensor<T>& y);

// ---------------------------------------------------------------------------
// Optimization

struct AdamState {
  ParamBuffers<float> m;
  ParamBuffers<float> v;
  std::int64_t step = 0;
};

struct AdamOptions {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

void adam_step(ParamBuffers<float>& params, const ParamBuffers<float>& grads,
               AdamState& state, const AdamOptions& options);

struct TrainingSample {
  Tensor<float> input;
  Tensor<float> target;
};

TrainingSample make_sample(const RgbImage& image, const Colormap& cmap, const NetConfig& config);

struct LossPoint {
  std::int64_t iteration = 0;
  double loss = 0.0;                // mean training loss since the previous point
  std::optional<double> eval_loss;  // mean loss over the evaluation set

  friend bool operator==(const LossPoint&, const LossPoint&) = default;
};

struct TrainOptions {
  std::int64_t iterations = 5000;
  double lr = 1e-4;
  int batch = 8;
  int log_every = 100;
  int eval_every = 1;  // evaluation loss on every n-th log point (and the last)
  int jobs = 1;
  std::uint64_t seed = 1;  // batch order
  std::function<void(const LossPoint&)> on_log;
};

struct TrainResult {
  NetworkWeights weights;
  std::vector<LossPoint> curve;
};

/// Adam on the mean per-sample L2 loss. Batches are drawn without replacement from a
/// seeded per-epoch shuffle (batch size capped by the sample count). Per-sample gradients
/// are summed in sample order, so results do not depend on the job count.
TrainResult train(const std::vector<TrainingSample>& samples, const NetConfig& config,
                  const TrainOptions& options, const std::vector<TrainingSample>* eval = nullptr);

/// Continues from existing weights (the config is taken from them).
TrainResult train(const std::vector<TrainingSample>& samples, NetworkWeights init,
                  const TrainOptions& options, const std::vector<TrainingSample>* eval = nullptr);

double evaluate_loss(const NetworkWeights& weights, const std::vector<TrainingSample>& samples,
                     int jobs = 1);

void write_loss_csv(const std::filesystem::path& path, const std::vector<LossPoint>& curve);

// ---------------------------------------------------------------------------
// Serialization

void save_weights(const std::filesystem::path& path, const NetworkWeights& weights);
std::vector<std::uint8_t> serialize_weights(const NetworkWeights& weights);

/// Throws corrupt (bad magic, truncation, shape errors) or version_mismatch.
NetworkWeights load_weights(const std::filesystem::path& path);
NetworkWeights deserialize_weights(const std::vector<std::uint8_t>& bytes);

/// As load_weights, but also throws config_mismatch unless the stored config equals expected.
NetworkWeights load_weights(const std::filesystem::path& path, const NetConfig& expected);

/// Short content hash of the serialized weights.
std::string weights_id(const NetworkWeights& weights);

}  // namespace chromex
