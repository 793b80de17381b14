#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <thread>

#include "chromex/error.hpp"
#include "chromex/tensornet.hpp"
#include "internal/parallel.hpp"

namespace chromex {

void adam_step(ParamBuffers<float>& params, const ParamBuffers<float>& grads, AdamState& state,
               const AdamOptions& o) {
  if (grads.size() != params.size()) {
    throw Error(ErrorCode::shape_mismatch, "gradients do not match the parameters");
  }
  if (state.m.size() != params.size()) {
    state.m.assign(params.size(), {});
    state.v.assign(params.size(), {});
    for (std::size_t i = 0; i < params.size(); ++i) {
      state.m[i].assign(params[i].size(), 0.0f);
      state.v[i].assign(params[i].size(), 0.0f);
    }
    state.step = 0;
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(o.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(o.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (grads[i].size() != params[i].size() || state.m[i].size() != params[i].size()) {
      throw Error(ErrorCode::shape_mismatch, "gradients do not match the parameters");
    }
    auto& p = params[i];
    auto& m = state.m[i];
    auto& v = state.v[i];
    const auto& g = grads[i];
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double gk = g[k];
      const double mk = o.beta1 * m[k] + (1.0 - o.beta1) * gk;
      const double vk = o.beta2 * v[k] + (1.0 - o.beta2) * gk * gk;
      m[k] = static_cast<float>(mk);
      v[k] = static_cast<float>(vk);
      p[k] = static_cast<float>(p[k] - o.lr * (mk / c1) / (std::sqrt(vk / c2) + o.eps));
    }
  }
}

TrainingSample make_sample(const RgbImage& image, const Colormap& cmap, const NetConfig& config) {
  return {prepare_input<float>(image_to_histogram_map(image), config),
          legend_target(to_legend_image(cmap))};
}

namespace {

void check_samples(const std::vector<TrainingSample>& samples, const NetConfig& config) {
  for (const auto& s : samples) {
    if (s.input.c != 1 || s.input.h != config.input_size || s.input.w != config.input_size ||
        s.target.c != 3 || s.target.h != kOutRows || s.target.w != kOutCols) {
      throw Error(ErrorCode::shape_mismatch, "training sample does not match the network config");
    }
  }
}

}  // namespace

TrainResult train(const std::vector<TrainingSample>& samples, const NetConfig& config,
                  const TrainOptions& options, const std::vector<TrainingSample>* eval) {
  return train(samples, init_weights(config), options, eval);
}

TrainResult train(const std::vector<TrainingSample>& samples, NetworkWeights init,
                  const TrainOptions& options, const std::vector<TrainingSample>* eval) {
  if (samples.empty()) throw Error(ErrorCode::empty_input, "no training samples");
  if (options.iterations < 0 || options.batch < 1 || options.log_every < 1 || options.eval_every < 1 || !(options.lr > 0)) {
    throw Error(ErrorCode::invalid_argument, "invalid training options");
  }
  check_samples(samples, init.config);
  if (eval) check_samples(*eval, init.config);

  Network<float> net(init);
  TrainResult result;
  result.weights = std::move(init);
  if (options.iterations == 0) return result;

  const std::size_t batch = std::min<std::size_t>(static_cast<std::size_t>(options.batch), samples.size());
  const std::size_t slots = std::min<std::size_t>(batch, static_cast<std::size_t>(std::max(options.jobs, 1)));
  std::vector<ParamBuffers<float>> per_sample(batch);
  std::vector<double> losses(batch);
  auto grads = net.zero_gradients();
  AdamState adam;
  const AdamOptions adam_opts{options.lr, 0.9, 0.999, 1e-8};

  std::mt19937_64 rng(options.seed);
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t cursor = order.size();

  double window_loss = 0.0;
  std::int64_t window_count = 0;
  double last_batch_loss = 0.0;
  std::vector<std::size_t> picks(batch);
  for (std::int64_t it = 1; it <= options.iterations; ++it) {
    for (std::size_t k = 0; k < batch; ++k) {
      if (cursor == order.size()) {
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      picks[k] = order[cursor++];
    }
    // Per-sample buffers are reused; slots > 1 needs one buffer per sample in flight.
    internal::parallel_for(batch, static_cast<int>(slots), [&](std::size_t k) {
      auto& g = per_sample[k];
      if (g.empty()) {
        g = net.zero_gradients();
      } else {
        for (auto& v : g) std::fill(v.begin(), v.end(), 0.0f);
      }
      const auto& s = samples[picks[k]];
      losses[k] = net.backward(s.input, s.target, g);
    });
    const float inv = 1.0f / static_cast<float>(batch);
    double batch_loss = 0.0;
    for (std::size_t i = 0; i < grads.size(); ++i) {
      auto& dst = grads[i];
      std::fill(dst.begin(), dst.end(), 0.0f);
      for (std::size_t k = 0; k < batch; ++k) {
        const auto& src = per_sample[k][i];
        for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
      }
      for (float& v : dst) v *= inv;
    }
    for (std::size_t k = 0; k < batch; ++k) batch_loss += losses[k];
    batch_loss /= static_cast<double>(batch);
    adam_step(net.params(), grads, adam, adam_opts);

    last_batch_loss = batch_loss;
    window_loss += batch_loss;
    ++window_count;
    if (it % options.log_every == 0 || it == options.iterations) {
      LossPoint point{it, window_loss / static_cast<double>(window_count), std::nullopt};
      const bool eval_due = it % (options.log_every * options.eval_every) == 0 || it == options.iterations;
      if (eval && !eval->empty() && eval_due) {
        net.export_to(result.weights);
        point.eval_loss = evaluate_loss(result.weights, *eval, options.jobs);
      }
      result.curve.push_back(point);
      if (options.on_log) options.on_log(point);
      window_loss = 0.0;
      window_count = 0;
    }
  }
  net.export_to(result.weights);
  result.weights.meta.iterations += options.iterations;
  result.weights.meta.final_loss = last_batch_loss;
  result.weights.meta.learning_rate = options.lr;
  result.weights.meta.batch = static_cast<int>(batch);
  result.weights.meta.samples = samples.size();
  return result;
}

double evaluate_loss(const NetworkWeights& weights, const std::vector<TrainingSample>& samples,
                     int jobs) {
  if (samples.empty()) throw Error(ErrorCode::empty_input, "no evaluation samples");
  check_samples(samples, weights.config);
  const Network<float> net(weights);
  std::vector<double> losses(samples.size());
  internal::parallel_for(samples.size(), jobs, [&](std::size_t i) {
    losses[i] = l2_loss(net.forward(samples[i].input), samples[i].target);
  });
  return std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(losses.size());
}

void write_loss_csv(const std::filesystem::path& path, const std::vector<LossPoint>& curve) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  out.precision(9);
  out << "iteration,loss,eval_loss\n";
  for (const auto& p : curve) {
    out << p.iteration << ',' << p.loss << ',';
    if (p.eval_loss) out << *p.eval_loss;
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
}

}  // namespace chromex
