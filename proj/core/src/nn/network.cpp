#include <algorithm>
#include <cmath>
#include <random>

#include "chromex/error.hpp"
#include "chromex/tensornet.hpp"
#include "nn/ops.hpp"

namespace chromex {

namespace {

constexpr ConvGeometry kDown{3, 2, 1, 1};
constexpr ConvGeometry kSame{3, 1, 1, 1};
constexpr ConvGeometry kPoint{1, 1, 1, 0};

ConvGeometry dilated(int rate) { return {3, 1, rate, rate}; }

int final_size(const NetConfig& c) { return c.input_size >> c.stage_channels.size(); }

/// Output columns produced by each head pixel.
int head_fanout(const NetConfig& c) { return kOutCols / final_size(c); }

int branch_count(const NetConfig& c) { return static_cast<int>(c.aspp_rates.size()) + 1; }

}  // namespace

NetConfig desk_config() { return NetConfig{}; }

NetConfig full_config() {
  NetConfig c;
  c.input_size = 256;
  c.stage_channels = {64, 128, 256, 512};
  return c;
}

NetConfig tiny_config() {
  NetConfig c;
  c.input_size = 16;
  c.stage_channels = {2, 4, 8, 16};
  return c;
}

void validate_config(const NetConfig& c) {
  const auto fail = [](const std::string& msg) { throw Error(ErrorCode::invalid_argument, msg); };
  if (c.stage_channels.size() != 4) fail("the network has exactly four stages");
  for (std::size_t s = 0; s < c.stage_channels.size(); ++s) {
    if (c.stage_channels[s] < 1) fail("stage channels must be positive");
    if (s > 0 && c.stage_channels[s] != 2 * c.stage_channels[s - 1]) {
      fail("each stage must double the channel count");
    }
  }
  if (c.input_size < 16 || c.input_size > 256 || 256 % c.input_size != 0) {
    fail("input_size must divide 256 and be at least 16");
  }
  if (c.aspp_enabled) {
    if (c.aspp_rates.empty()) fail("ASPP needs at least one rate");
    for (int r : c.aspp_rates) {
      if (r < 1) fail("ASPP rates must be positive");
    }
  }
}

std::vector<ParamTensor> parameter_layout(const NetConfig& c) {
  validate_config(c);
  std::vector<ParamTensor> out;
  const auto add = [&out](std::string name, std::vector<int> shape) {
    std::size_t n = 1;
    for (int d : shape) n *= static_cast<std::size_t>(d);
    out.push_back({std::move(name), std::move(shape), std::vector<float>(n, 0.0f)});
  };
  int cin = 1;
  for (std::size_t s = 0; s < c.stage_channels.size(); ++s) {
    const int ch = c.stage_channels[s];
    const std::string p = "stage" + std::to_string(s + 1) + ".";
    add(p + "conv1.weight", {ch, cin, 3, 3});
    add(p + "conv1.bias", {ch});
    add(p + "conv2.weight", {ch, ch, 3, 3});
    add(p + "conv2.bias", {ch});
    if (c.aspp_enabled) {
      for (int r : c.aspp_rates) {
        add(p + "aspp.rate" + std::to_string(r) + ".weight", {ch, ch, 3, 3});
        add(p + "aspp.rate" + std::to_string(r) + ".bias", {ch});
      }
      add(p + "aspp.pointwise.weight", {ch, ch, 1, 1});
      add(p + "aspp.pointwise.bias", {ch});
      add(p + "aspp.fuse.weight", {ch, branch_count(c) * ch, 1, 1});
      add(p + "aspp.fuse.bias", {ch});
    }
    cin = ch;
  }
  add("head.weight", {3 * head_fanout(c), cin, 1, 1});
  add("head.bias", {3 * head_fanout(c)});
  return out;
}

std::size_t NetworkWeights::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params) n += p.data.size();
  return n;
}

NetworkWeights init_weights(const NetConfig& config) {
  NetworkWeights w;
  w.config = config;
  w.params = parameter_layout(config);
  std::mt19937_64 rng(config.seed);
  for (auto& p : w.params) {
    if (p.shape.size() != 4) continue;  // biases stay zero
    const int fan_in = p.shape[1] * p.shape[2] * p.shape[3];
    // ReLU layers use gain sqrt(2); the sigmoid head uses gain 1.
    const double gain = p.name.starts_with("head.") ? 1.0 : std::sqrt(2.0);
    const double bound = gain * std::sqrt(3.0 / fan_in);
    std::uniform_real_distribution<double> u(-bound, bound);
    for (float& v : p.data) v = static_cast<float>(u(rng));
  }
  return w;
}

template <typename T>
Tensor<T> prepare_input(const HistogramMap& map, const NetConfig& config) {
  validate_config(config);
  const int n = config.input_size;
  const int f = HistogramMap::kSize / n;
  Tensor<T> out(1, n, n);
  const double scale = 1.0 / (f * f);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      double s = 0.0;
      for (int dy = 0; dy < f; ++dy) {
        for (int dx = 0; dx < f; ++dx) s += map.at(y * f + dy, x * f + dx);
      }
      out.at(0, y, x) = static_cast<T>(s * scale);
    }
  }
  return out;
}

Tensor<float> legend_target(const ColormapImage& legend) {
  Tensor<float> t(3, kOutRows, kOutCols);
  for (int r = 0; r < kOutRows; ++r) {
    for (int c = 0; c < kOutCols; ++c) {
      const NormLab n = normalize_lab(srgb_to_lab(legend.at(r, c)));
      t.at(0, r, c) = static_cast<float>(n.l);
      t.at(1, r, c) = static_cast<float>(n.a);
      t.at(2, r, c) = static_cast<float>(n.b);
    }
  }
  return t;
}

ColormapImage prediction_to_image(const Tensor<float>& p) {
  if (p.c != 3 || p.h != kOutRows || p.w != kOutCols) {
    throw Error(ErrorCode::shape_mismatch, "prediction must be 3x10x256");
  }
  ColormapImage img;
  for (int r = 0; r < kOutRows; ++r) {
    for (int c = 0; c < kOutCols; ++c) {
      const NormLab n{std::clamp<double>(p.at(0, r, c), 0.0, 1.0),
                      std::clamp<double>(p.at(1, r, c), 0.0, 1.0),
                      std::clamp<double>(p.at(2, r, c), 0.0, 1.0)};
      img.at(r, c) = lab_to_srgb(denormalize_lab(n));
    }
  }
  return img;
}

template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const T* weight, const T* bias, int cout,
                 const ConvGeometry& g) {
  if (g.kernel < 1 || g.stride < 1 || g.dilation < 1 || g.padding < 0 || cout < 1) {
    throw Error(ErrorCode::invalid_argument, "invalid convolution geometry");
  }
  const int hout = nn::conv_out_size(input.h, g);
  const int wout = nn::conv_out_size(input.w, g);
  if (hout < 1 || wout < 1 || input.c < 1) {
    throw Error(ErrorCode::shape_mismatch, "convolution produces an empty output");
  }
  Tensor<T> out(cout, hout, wout);
  nn::conv_forward(input, weight, bias, cout, g, out.data.data());
  return out;
}

namespace {

/// ASPP forward on raw parameter pointers; fills the concatenated branch activations.
template <typename T>
Tensor<T> aspp_forward(const Tensor<T>& x, const std::vector<int>& rates, int bc, int cout,
                       const std::vector<const T*>& bw, const std::vector<const T*>& bb,
                       const T* pw, const T* pb, const T* fw, const T* fb, Tensor<T>& cat) {
  const int branches = static_cast<int>(rates.size()) + (pw ? 1 : 0);
  cat = Tensor<T>(branches * bc, x.h, x.w);
  const std::size_t slice = static_cast<std::size_t>(bc) * x.h * x.w;
  for (std::size_t k = 0; k < rates.size(); ++k) {
    nn::conv_forward(x, bw[k], bb[k], bc, dilated(rates[k]), cat.data.data() + k * slice);
  }
  if (pw) nn::conv_forward(x, pw, pb, bc, kPoint, cat.data.data() + rates.size() * slice);
  nn::relu_inplace(cat.data.data(), cat.size());
  Tensor<T> out(cout, x.h, x.w);
  nn::conv_forward(cat, fw, fb, cout, kPoint, out.data.data());
  nn::relu_inplace(out.data.data(), out.size());
  return out;
}

}  // namespace

template <typename T>
Tensor<T> aspp(const Tensor<T>& input, const std::vector<int>& rates, int branch_channels,
               int out_channels, const AsppWeights<T>& w) {
  const std::size_t k3 = static_cast<std::size_t>(branch_channels) * input.c * 9;
  if (rates.size() != w.branch_w.size() || rates.size() != w.branch_b.size()) {
    throw Error(ErrorCode::shape_mismatch, "one kernel per ASPP rate expected");
  }
  for (std::size_t k = 0; k < rates.size(); ++k) {
    if (w.branch_w[k].size() != k3 || w.branch_b[k].size() != static_cast<std::size_t>(branch_channels)) {
      throw Error(ErrorCode::shape_mismatch, "ASPP branch weights do not match the input");
    }
  }
  const bool pointwise = !w.pointwise_w.empty();
  if (pointwise && w.pointwise_w.size() != static_cast<std::size_t>(branch_channels) * input.c) {
    throw Error(ErrorCode::shape_mismatch, "ASPP 1x1 branch does not match the input");
  }
  const int branches = static_cast<int>(rates.size()) + (pointwise ? 1 : 0);
  if (w.fuse_w.size() != static_cast<std::size_t>(out_channels) * branches * branch_channels) {
    throw Error(ErrorCode::shape_mismatch, "ASPP fusion weights do not match the branches");
  }
  std::vector<const T*> bw;
  std::vector<const T*> bb;
  for (std::size_t k = 0; k < rates.size(); ++k) {
    bw.push_back(w.branch_w[k].data());
    bb.push_back(w.branch_b[k].data());
  }
  Tensor<T> cat;
  return aspp_forward<T>(input, rates, branch_channels, out_channels, bw, bb,
                         pointwise ? w.pointwise_w.data() : nullptr,
                         pointwise ? w.pointwise_b.data() : nullptr, w.fuse_w.data(),
                         w.fuse_b.empty() ? nullptr : w.fuse_b.data(), cat);
}

// ---------------------------------------------------------------------------

template <typename T>
struct Network<T>::Cache {
  struct Stage {
    Tensor<T> a;    // after conv1 + ReLU
    Tensor<T> b;    // after conv2 (+ skip) + ReLU
    Tensor<T> cat;  // ASPP branch activations
    Tensor<T> out;  // stage output
  };
  std::vector<Stage> stages;
  Tensor<T> head;  // sigmoid activations, 3F x Hf x Wf
};

namespace {

struct StageIndex {
  int c1w, c1b, c2w, c2b;
  std::vector<int> rw, rb;
  int pw = -1, pb = -1, fw = -1, fb = -1;
};

std::vector<StageIndex> stage_indices(const NetConfig& c) {
  std::vector<StageIndex> out;
  int i = 0;
  for (std::size_t s = 0; s < c.stage_channels.size(); ++s) {
    StageIndex idx{i, i + 1, i + 2, i + 3, {}, {}};
    i += 4;
    if (c.aspp_enabled) {
      for (std::size_t r = 0; r < c.aspp_rates.size(); ++r) {
        idx.rw.push_back(i++);
        idx.rb.push_back(i++);
      }
      idx.pw = i++;
      idx.pb = i++;
      idx.fw = i++;
      idx.fb = i++;
    }
    out.push_back(std::move(idx));
  }
  return out;
}

template <typename T>
T sigmoid(T x) {
  return x >= T(0) ? T(1) / (T(1) + std::exp(-x)) : std::exp(x) / (T(1) + std::exp(x));
}

}  // namespace

template <typename T>
Network<T>::Network(const NetworkWeights& weights) : config_(weights.config) {
  const auto layout = parameter_layout(config_);
  if (layout.size() != weights.params.size()) {
    throw Error(ErrorCode::config_mismatch, "weights do not match their config");
  }
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const ParamTensor& p = weights.params[i];
    if (p.name != layout[i].name || p.shape != layout[i].shape ||
        p.data.size() != layout[i].data.size()) {
      throw Error(ErrorCode::config_mismatch, "parameter '" + p.name + "' does not match the config");
    }
    params_.emplace_back(p.data.begin(), p.data.end());
  }
}

template <typename T>
ParamBuffers<T> Network<T>::zero_gradients() const {
  ParamBuffers<T> g;
  for (const auto& p : params_) g.emplace_back(p.size(), T(0));
  return g;
}

template <typename T>
void Network<T>::export_to(NetworkWeights& weights) const {
  weights.config = config_;
  if (weights.params.size() != params_.size()) weights.params = parameter_layout(config_);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& dst = weights.params[i].data;
    dst.resize(params_[i].size());
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] = static_cast<float>(params_[i][k]);
  }
}

template <typename T>
Tensor<T> Network<T>::run(const Tensor<T>& input, Cache* cache) const {
  if (input.c != 1 || input.h != config_.input_size || input.w != config_.input_size) {
    throw Error(ErrorCode::shape_mismatch,
                "network input must be 1x" + std::to_string(config_.input_size) + "x" +
                    std::to_string(config_.input_size));
  }
  const auto idx = stage_indices(config_);
  const auto P = [this](int i) { return params_[static_cast<std::size_t>(i)].data(); };
  typename Cache::Stage local;
  if (cache) cache->stages.resize(idx.size());

  Tensor<T> x = input;
  for (std::size_t s = 0; s < idx.size(); ++s) {
    const int ch = config_.stage_channels[s];
    auto& st = cache ? cache->stages[s] : local;
    st.a = conv2d(x, P(idx[s].c1w), P(idx[s].c1b), ch, kDown);
    nn::relu_inplace(st.a.data.data(), st.a.size());
    st.b = conv2d(st.a, P(idx[s].c2w), P(idx[s].c2b), ch, kSame);
    if (config_.residual) {
      for (std::size_t i = 0; i < st.b.size(); ++i) st.b.data[i] += st.a.data[i];
    }
    nn::relu_inplace(st.b.data.data(), st.b.size());
    if (config_.aspp_enabled) {
      std::vector<const T*> bw;
      std::vector<const T*> bb;
      for (std::size_t r = 0; r < idx[s].rw.size(); ++r) {
        bw.push_back(P(idx[s].rw[r]));
        bb.push_back(P(idx[s].rb[r]));
      }
      st.out = aspp_forward<T>(st.b, config_.aspp_rates, ch, ch, bw, bb, P(idx[s].pw),
                               P(idx[s].pb), P(idx[s].fw), P(idx[s].fb), st.cat);
    } else {
      st.out = st.b;
    }
    x = st.out;
  }

  const int fan = head_fanout(config_);
  const auto n = params_.size();
  Tensor<T> head = conv2d(x, params_[n - 2].data(), params_[n - 1].data(), 3 * fan, kPoint);
  for (T& v : head.data) v = sigmoid(v);

  // Each head pixel (row y, column k) emits fan consecutive output columns.
  Tensor<T> wide(3, head.h, head.w * fan);
  for (int ch = 0; ch < 3; ++ch) {
    for (int y = 0; y < head.h; ++y) {
      for (int k = 0; k < head.w; ++k) {
        for (int f = 0; f < fan; ++f) wide.at(ch, y, k * fan + f) = head.at(ch * fan + f, y, k);
      }
    }
  }
  if (cache) cache->head = std::move(head);
  return nn::resize_rows(wide, kOutRows);
}

template <typename T>
Tensor<T> Network<T>::forward(const Tensor<T>& input) const {
  return run(input, nullptr);
}

template <typename T>
double Network<T>::backward(const Tensor<T>& input, const Tensor<T>& target,
                            ParamBuffers<T>& grads) const {
  Cache cache;
  const Tensor<T> out = run(input, &cache);
  if (target.c != out.c || target.h != out.h || target.w != out.w) {
    throw Error(ErrorCode::shape_mismatch, "target must be 3x10x256");
  }
  if (grads.size() != params_.size()) {
    throw Error(ErrorCode::shape_mismatch, "gradient buffers do not match the parameters");
  }
  const double loss = l2_loss(out, target);
  const std::size_t pixels = static_cast<std::size_t>(out.h) * out.w;
  Tensor<T> d_out(out.c, out.h, out.w);
  const T scale = static_cast<T>(2.0 / static_cast<double>(pixels));
  for (std::size_t i = 0; i < out.size(); ++i) d_out.data[i] = scale * (out.data[i] - target.data[i]);

  // Head: resize, column unfolding, sigmoid, 1x1 conv.
  const Tensor<T> d_wide = nn::resize_rows_backward(d_out, cache.head.h);
  const int fan = head_fanout(config_);
  const Tensor<T>& head = cache.head;
  Tensor<T> d_head(head.c, head.h, head.w);
  for (int ch = 0; ch < 3; ++ch) {
    for (int y = 0; y < head.h; ++y) {
      for (int k = 0; k < head.w; ++k) {
        for (int f = 0; f < fan; ++f) {
          const T s = head.at(ch * fan + f, y, k);
          d_head.at(ch * fan + f, y, k) = d_wide.at(ch, y, k * fan + f) * s * (T(1) - s);
        }
      }
    }
  }
  const auto idx = stage_indices(config_);
  const std::size_t n = params_.size();
  const Tensor<T>& last = cache.stages.back().out;
  Tensor<T> d_x(last.c, last.h, last.w);
  nn::conv_backward(last, params_[n - 2].data(), 3 * fan, kPoint, d_head.data.data(),
                    grads[n - 2].data(), grads[n - 1].data(), &d_x);

  const auto P = [this](int i) { return params_[static_cast<std::size_t>(i)].data(); };
  const auto G = [&grads](int i) { return grads[static_cast<std::size_t>(i)].data(); };
  for (std::size_t s = idx.size(); s-- > 0;) {
    const auto& st = cache.stages[s];
    const int ch = config_.stage_channels[s];
    const Tensor<T>& stage_in = s == 0 ? input : cache.stages[s - 1].out;

    Tensor<T> d_b;
    if (config_.aspp_enabled) {
      nn::relu_backward(st.out.data.data(), d_x.data.data(), d_x.size());
      Tensor<T> d_cat(st.cat.c, st.cat.h, st.cat.w);
      nn::conv_backward(st.cat, P(idx[s].fw), ch, kPoint, d_x.data.data(), G(idx[s].fw),
                        G(idx[s].fb), &d_cat);
      nn::relu_backward(st.cat.data.data(), d_cat.data.data(), d_cat.size());
      d_b = Tensor<T>(st.b.c, st.b.h, st.b.w);
      const std::size_t slice = static_cast<std::size_t>(ch) * st.b.h * st.b.w;
      for (std::size_t r = 0; r < idx[s].rw.size(); ++r) {
        nn::conv_backward(st.b, P(idx[s].rw[r]), ch, dilated(config_.aspp_rates[r]),
                          d_cat.data.data() + r * slice, G(idx[s].rw[r]), G(idx[s].rb[r]), &d_b);
      }
      nn::conv_backward(st.b, P(idx[s].pw), ch, kPoint,
                        d_cat.data.data() + idx[s].rw.size() * slice, G(idx[s].pw), G(idx[s].pb),
                        &d_b);
    } else {
      d_b = std::move(d_x);
    }

    nn::relu_backward(st.b.data.data(), d_b.data.data(), d_b.size());
    Tensor<T> d_a(st.a.c, st.a.h, st.a.w);
    if (config_.residual) d_a.data = d_b.data;
    nn::conv_backward(st.a, P(idx[s].c2w), ch, kSame, d_b.data.data(), G(idx[s].c2w),
                      G(idx[s].c2b), &d_a);
    nn::relu_backward(st.a.data.data(), d_a.data.data(), d_a.size());
    Tensor<T> d_in;
    if (s > 0) d_in = Tensor<T>(stage_in.c, stage_in.h, stage_in.w);
    nn::conv_backward(stage_in, P(idx[s].c1w), ch, kDown, d_a.data.data(), G(idx[s].c1w),
                      G(idx[s].c1b), s > 0 ? &d_in : nullptr);
    d_x = std::move(d_in);
  }
  return loss;
}

template <typename T>
double l2_loss(const Tensor<T>& x, const Tensor<T>& y) {
  if (x.c != y.c || x.h != y.h || x.w != y.w) {
    throw Error(ErrorCode::shape_mismatch, "loss operands differ in shape");
  }
  const std::size_t pixels = static_cast<std::size_t>(x.h) * x.w;
  if (pixels == 0) throw Error(ErrorCode::shape_mismatch, "empty loss operands");
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = static_cast<double>(x.data[i]) - static_cast<double>(y.data[i]);
    sum += d * d;
  }
  return sum / static_cast<double>(pixels);
}

Tensor<float> forward(const NetworkWeights& weights, const HistogramMap& map) {
  const Network<float> net(weights);
  return net.forward(prepare_input<float>(map, weights.config));
}

#define CHROMEX_INSTANTIATE(T)                                                                  \
  template Tensor<T> conv2d<T>(const Tensor<T>&, const T*, const T*, int, const ConvGeometry&); \
  template Tensor<T> aspp<T>(const Tensor<T>&, const std::vector<int>&, int, int,               \
                             const AsppWeights<T>&);                                            \
  template Tensor<T> prepare_input<T>(const HistogramMap&, const NetConfig&);                   \
  template double l2_loss<T>(const Tensor<T>&, const Tensor<T>&);                               \
  template class Network<T>;

CHROMEX_INSTANTIATE(float)
CHROMEX_INSTANTIATE(double)

#undef CHROMEX_INSTANTIATE

}  // namespace chromex
