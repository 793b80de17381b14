// Acceptance checks. Each criterion prints one line: "PASS <name>: ..." or "FAIL <name>: ...".

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "chromex/apps.hpp"
#include "chromex/baselines.hpp"
#include "chromex/chartgen.hpp"
#include "chromex/colormap_io.hpp"
#include "chromex/error.hpp"
#include "chromex/eval.hpp"
#include "chromex/histogram.hpp"
#include "chromex/pipeline.hpp"
#include "chromex/refine.hpp"
#include "chromex/tensornet.hpp"

namespace fs = std::filesystem;
using namespace chromex;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Context {
  fs::path workdir;
  int jobs = 1;
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream os;
  os.precision(digits);
  os << v;
  return os.str();
}

// --- rotation invariance ---------------------------------------------------------------

Outcome rotation(const Context& ctx) {
  CorpusConfig cfg = default_corpus_config();
  cfg.count = 50;
  cfg.jobs = ctx.jobs;
  const auto records = generate_corpus(cfg, ctx.workdir / "rotation");
  std::size_t checked = 0;
  for (const auto& r : records) {
    const RgbImage img = read_png(r.image_path);
    const HistogramMap ref = image_to_histogram_map(img);
    if (!(image_to_histogram_map(rotate90(img)) == ref) || !(image_to_histogram_map(rotate180(img)) == ref) ||
        !(image_to_histogram_map(rotate270(img)) == ref)) {
      return {false, "histogram of a rotation of " + r.id + " differs"};
    }
    ++checked;
  }
  return {checked == 50, std::to_string(checked) + " images x 3 rotations bit-identical"};
}

// --- DTW oracle ----------------------------------------------------------------------------

double brute_force(const std::vector<LabColor>& a, const std::vector<LabColor>& b) {
  double best = std::numeric_limits<double>::infinity();
  std::function<void(std::size_t, std::size_t, double)> walk = [&](std::size_t i, std::size_t j, double acc) {
    acc += delta_norm(a[i], b[j]);
    if (i + 1 == a.size() && j + 1 == b.size()) {
      best = std::min(best, acc);
      return;
    }
    if (i + 1 < a.size() && j + 1 < b.size()) walk(i + 1, j + 1, acc);
    if (i + 1 < a.size()) walk(i + 1, j, acc);
    if (j + 1 < b.size()) walk(i, j + 1, acc);
  };
  walk(0, 0, 0.0);
  return best;
}

Outcome dtw_oracle(const Context&) {
  std::mt19937_64 rng(2021);
  std::uniform_int_distribution<std::size_t> len(1, 6);
  std::uniform_real_distribution<double> L(0.0, 100.0);
  std::uniform_real_distribution<double> ab(-128.0, 127.0);
  double worst = 0.0;
  for (int t = 0; t < 500; ++t) {
    std::vector<LabColor> a(len(rng));
    std::vector<LabColor> b(len(rng));
    for (auto& c : a) c = {L(rng), ab(rng), ab(rng)};
    for (auto& c : b) c = {L(rng), ab(rng), ab(rng)};
    worst = std::max(worst, std::abs(dtw_distance(a, b).raw - brute_force(a, b)));
  }
  return {worst <= 1e-9, "500 pairs, max |dp - enumeration| = " + fmt(worst, 3)};
}

// --- legend round trip ---------------------------------------------------------------------

Outcome legend_roundtrip(const Context&) {
  double worst_color = 0.0;
  double worst_dtw = 0.0;
  std::size_t maps = 0;
  for (const Colormap& c : load_colormap_library()) {
    const Colormap out = refine(to_legend_image(c));
    if (out.kind != c.kind) return {false, c.name + ": kind " + std::string(kind_name(out.kind))};
    if (c.is_continuous()) {
      worst_dtw = std::max(worst_dtw, dtw_distance(c, out).normalized);
    } else {
      if (out.size() != c.size()) return {false, c.name + ": " + std::to_string(out.size()) + " colors"};
      for (std::size_t i = 0; i < c.size(); ++i) {
        worst_color = std::max(worst_color, delta_norm(out.colors[i], c.colors[i]));
      }
    }
    ++maps;
  }
  const bool pass = worst_color <= 0.02 && worst_dtw <= 0.02;
  return {pass, std::to_string(maps) + " maps, worst discrete delta " + fmt(worst_color) +
                    ", worst continuous D_dtw " + fmt(worst_dtw)};
}

// --- gradient check -------------------------------------------------------------------------

Outcome gradient_check(const Context&) {
  NetConfig config = tiny_config();
  config.seed = 17;
  NetworkWeights w = init_weights(config);
  // Random biases keep pre-activations off the ReLU kink, where central differences are invalid.
  std::mt19937_64 bias_rng(20);
  std::uniform_real_distribution<double> bias_u(-0.1, 0.1);
  for (auto& p : w.params) {
    if (p.shape.size() == 1) {
      for (float& v : p.data) v = static_cast<float>(bias_u(bias_rng));
    }
  }
  Network<double> net(w);
  std::mt19937_64 data_rng(18);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Tensor<double> in(1, config.input_size, config.input_size);
  for (double& v : in.data) v = u(data_rng);
  Tensor<double> target(3, kOutRows, kOutCols);
  for (double& v : target.data) v = u(data_rng);
  auto grads = net.zero_gradients();
  net.backward(in, target, grads);

  std::vector<std::pair<std::size_t, std::size_t>> index;
  for (std::size_t i = 0; i < net.params().size(); ++i) {
    for (std::size_t k = 0; k < net.params()[i].size(); ++k) index.emplace_back(i, k);
  }
  std::mt19937_64 rng(17);
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
    const double scale = std::max({std::abs(numeric), std::abs(analytic), 1e-4});
    worst = std::max(worst, std::abs(numeric - analytic) / scale);
  }
  return {worst <= 1e-5, "200 parameters, max relative error " + fmt(worst, 3)};
}

// --- memorization ---------------------------------------------------------------------------------

Outcome memorization(const Context& ctx) {
  const NetConfig config = tiny_config();
  ChartStyle style;
  DataSpec spec;
  spec.n_categories = 4;
  spec.seed = 5;
  const Colormap& cmap = find_colormap("Dark2_4");
  const std::vector<TrainingSample> one{make_sample(render_chart(style, sample_data(spec), cmap), cmap, config)};
  TrainOptions opts;
  opts.iterations = 2000;
  opts.jobs = ctx.jobs;
  const TrainResult r = train(one, config, opts);
  const double loss = evaluate_loss(r.weights, one);
  return {loss < 1e-3, "L2 loss after 2000 iterations " + fmt(loss, 3)};
}

// --- desk scale --------------------------------------------------------------------------------------

constexpr std::int64_t kDeskIterations = 5000;

fs::path desk_manifest(const Context& ctx) {
  const fs::path dir = ctx.workdir / "desk";
  const fs::path manifest = dir / "manifest.jsonl";
  const CorpusConfig cfg = default_corpus_config();
  if (fs::exists(manifest)) {
    const auto records = read_manifest(manifest);
    bool ok = records.size() == *cfg.count;
    for (const auto& r : records) ok = ok && fs::exists(r.image_path);
    if (ok) return manifest;
  }
  CorpusConfig c = cfg;
  c.jobs = ctx.jobs;
  std::cerr << "generating the desk corpus in " << dir << "\n";
  generate_corpus(c, dir);
  return manifest;
}

/// Trains (or reuses a cached, matching) desk model. Training is deterministic, so a cached
/// file with the same config and training metadata is the same model.
NetworkWeights desk_weights(const Context& ctx, bool aspp) {
  NetConfig config = desk_config();
  config.aspp_enabled = aspp;
  const fs::path path = ctx.workdir / (aspp ? "aspp_on.cxw" : "aspp_off.cxw");
  const auto manifest = read_manifest(desk_manifest(ctx));
  std::size_t train_count = 0;
  for (const auto& r : manifest) train_count += r.split == Split::train;
  if (fs::exists(path)) {
    try {
      NetworkWeights w = load_weights(path, config);
      if (w.meta.iterations == kDeskIterations && w.meta.batch == 8 && w.meta.learning_rate == 1e-4 &&
          w.meta.samples == train_count) {
        return w;
      }
    } catch (const Error&) {
    }
  }
  std::cerr << "training the desk model (aspp " << (aspp ? "on" : "off") << ")\n";
  const auto samples = load_samples(manifest, Split::train, config, ctx.jobs);
  TrainOptions opts;
  opts.iterations = kDeskIterations;
  opts.batch = 8;
  opts.lr = 1e-4;
  opts.jobs = ctx.jobs;
  opts.on_log = [](const LossPoint& p) {
    if (p.iteration % 1000 == 0) std::cerr << "  iter " << p.iteration << " loss " << p.loss << "\n";
  };
  TrainResult r = train(samples, config, opts);
  save_weights(path, r.weights);
  return std::move(r.weights);
}

Outcome desk_end_to_end(const Context& ctx) {
  const auto manifest = read_manifest(desk_manifest(ctx));
  const Extractor cnn(desk_weights(ctx, true));
  const EvalReport report = evaluate(manifest, {Method::cnn, Method::palette, Method::sequence}, &cnn, ctx.jobs);
  fs::create_directories(ctx.workdir / "report");
  write_eval_json(ctx.workdir / "report" / "summary.json", report);
  write_eval_csv(ctx.workdir / "report" / "records.csv", report);
  write_eval_markdown(ctx.workdir / "report" / "summary.md", report);

  const GroupStats* cd = report.find("cnn", "kind=discrete");
  const GroupStats* cc = report.find("cnn", "kind=continuous");
  const GroupStats* pd = report.find("palette", "kind=discrete");
  const GroupStats* sc = report.find("sequence", "kind=continuous");
  const GroupStats* all = report.find("cnn", "overall");
  if (!cd || !cc || !pd || !sc || !all) return {false, "missing evaluation groups"};
  const bool a = cd->mean <= 0.08 && cc->mean <= 0.08;
  const bool b = cd->mean < pd->mean && cc->mean < sc->mean;
  const bool c = all->kind_accuracy >= 0.95;
  std::string detail = "cnn discrete " + fmt(cd->mean) + " vs palette " + fmt(pd->mean) + "; cnn continuous " +
                       fmt(cc->mean) + " vs sequence " + fmt(sc->mean) + "; kind accuracy " +
                       fmt(all->kind_accuracy) + " [a " + (a ? "ok" : "fail") + ", b " + (b ? "ok" : "fail") +
                       ", c " + (c ? "ok" : "fail") + "]";
  return {a && b && c, detail};
}

Outcome aspp_ablation(const Context& ctx) {
  const auto manifest = read_manifest(desk_manifest(ctx));
  const NetworkWeights on = desk_weights(ctx, true);
  const NetworkWeights off = desk_weights(ctx, false);
  const auto eval_on = load_samples(manifest, Split::test, on.config, ctx.jobs);
  const auto eval_off = load_samples(manifest, Split::test, off.config, ctx.jobs);
  const double l_on = evaluate_loss(on, eval_on, ctx.jobs);
  const double l_off = evaluate_loss(off, eval_off, ctx.jobs);
  return {l_on < l_off, "eval loss at 5000: aspp on " + fmt(l_on, 4) + ", off " + fmt(l_off, 4)};
}

// --- baseline failure modes ------------------------------------------------------------------------

Outcome baseline_failures(const Context&) {
  std::size_t six_total = 0;
  std::size_t six_five = 0;
  for (const char* name : {"Set2_6"}) {
    for (const ChartType type : {ChartType::pie, ChartType::grouped_bar, ChartType::stacked_bar, ChartType::line}) {
      for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        ChartStyle style;
        style.type = type;
        DataSpec spec;
        spec.n_categories = 6;
        spec.seed = seed;
        const RgbImage img = render_chart(style, sample_data(spec), find_colormap(name));
        ++six_total;
        six_five += palette_extract(img).size() == 5;
      }
    }
  }
  std::size_t pairs = 0;
  std::size_t worse = 0;
  for (const char* name : {"viridis", "Spectral", "YlGnBu", "RdBu"}) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      ChartStyle style;
      style.type = ChartType::heatmap;
      DataSpec uniform;
      uniform.kind = Distribution::uniform;
      uniform.n_points = 32;
      uniform.n_categories = 16;
      uniform.seed = seed;
      DataSpec skewed = uniform;
      skewed.kind = Distribution::beta;
      skewed.params = {0.3, 6.0};
      const Colormap& c = find_colormap(name);
      const double du = dtw_oriented(c, sequence_extract(render_chart(style, sample_data(uniform), c))).normalized;
      const double ds = dtw_oriented(c, sequence_extract(render_chart(style, sample_data(skewed), c))).normalized;
      ++pairs;
      worse += ds > du;
    }
  }
  return {six_five == six_total && worse == pairs,
          std::to_string(six_five) + "/" + std::to_string(six_total) + " six-color charts give 5 colors; " +
              std::to_string(worse) + "/" + std::to_string(pairs) + " skewed heatmaps score worse"};
}

// --- applications --------------------------------------------------------------------------------------

RgbImage flat(const std::string& cmap, ChartType type, int categories, std::uint64_t seed) {
  ChartStyle style;
  style.type = type;
  style.antialias = false;
  DataSpec spec;
  spec.kind = Distribution::uniform;
  spec.n_categories = categories;
  spec.n_points = type == ChartType::heatmap ? 32 : 20;
  spec.seed = seed;
  return render_chart(style, sample_data(spec), find_colormap(cmap));
}

Outcome applications(const Context&) {
  const auto exact = [](const RgbImage& img) { return palette_extract(img, 10); };
  std::size_t idempotent = 0;
  std::size_t cases = 0;
  for (const char* ref : {"tab10_10", "Paired_9"}) {
    const RgbImage reference = flat(ref, ChartType::grouped_bar, 8, 1);
    for (const char* tgt : {"Set1_3", "Dark2_4", "tab10_5", "Set2_6"}) {
      const int n = static_cast<int>(find_colormap(tgt).size());
      for (const ChartType type : {ChartType::pie, ChartType::stacked_bar}) {
        const RgbImage once = transfer(reference, flat(tgt, type, n, 2), exact);
        ++cases;
        idempotent += transfer(reference, once, exact) == once;
      }
    }
  }

  bool identity = true;
  for (const Colormap& c : load_colormap_library()) {
    if (c.is_continuous()) identity = identity && remap(c, 0.5).colors == c.colors;
  }

  double worst = 0.0;
  const std::pair<const char*, const char*> pairs[] = {
      {"viridis", "plasma"}, {"YlGnBu", "RdBu"}, {"cividis", "inferno"}, {"Spectral", "BuPu"}};
  for (const auto& [from, to] : pairs) {
    for (const ChartType type : {ChartType::heatmap, ChartType::region_map}) {
      const RgbImage a = flat(from, type, 16, 4);
      const RgbImage b = flat(to, type, 16, 4);
      const RgbImage out = recolor_image(a, find_colormap(from), find_colormap(to));
      for (int y = 0; y < a.height(); ++y) {
        for (int x = 0; x < a.width(); ++x) {
          worst = std::max(worst, delta_norm(srgb_to_lab(out.at(x, y)), srgb_to_lab(b.at(x, y))));
        }
      }
    }
  }
  return {idempotent == cases && identity && worst <= 0.03,
          std::to_string(idempotent) + "/" + std::to_string(cases) + " transfers idempotent; remap(0.5) identity " +
              (identity ? "exact" : "broken") + "; recolor worst delta " + fmt(worst)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, Outcome (*)(const Context&)>> criteria{
      {"rotation_invariance", rotation},   {"dtw_oracle", dtw_oracle},
      {"legend_roundtrip", legend_roundtrip}, {"gradient_check", gradient_check},
      {"memorization", memorization},      {"desk_end_to_end", desk_end_to_end},
      {"aspp_ablation", aspp_ablation},    {"baseline_failures", baseline_failures},
      {"applications", applications}};

  CLI::App app{"Acceptance checks", "chromex_acceptance"};
  std::vector<std::string> names;
  Context ctx;
  ctx.workdir = fs::current_path() / "acceptance";
  std::string workdir = ctx.workdir.string();
  app.add_option("criteria", names, "Criteria to run (default: all)");
  app.add_option("--workdir", workdir, "Directory for corpora, cached weights and reports")->capture_default_str();
  app.add_option("--jobs", ctx.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);
  ctx.workdir = workdir;
  fs::create_directories(ctx.workdir);

  if (names.empty()) {
    for (const auto& [name, fn] : criteria) names.push_back(name);
  }
  int failures = 0;
  for (const auto& name : names) {
    const auto it = std::find_if(criteria.begin(), criteria.end(), [&](const auto& c) { return c.first == name; });
    if (it == criteria.end()) {
      std::cout << "FAIL " << name << ": unknown criterion" << std::endl;
      ++failures;
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = it->second(ctx);
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << " (" << fmt(secs, 3) << " s)"
              << std::endl;
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
