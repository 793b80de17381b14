#include <httplib.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "chromex/apps.hpp"
#include "chromex/baselines.hpp"
#include "chromex/chartgen.hpp"
#include "chromex/colormap_io.hpp"
#include "chromex/error.hpp"
#include "chromex/eval.hpp"
#include "chromex/image.hpp"
#include "chromex/pipeline.hpp"
#include "chromex/tensornet.hpp"
#include "service.hpp"

namespace fs = std::filesystem;
using namespace chromex;

namespace {

std::string read_all(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::not_found, "cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

/// A preset name, or a path to a JSON config.
NetConfig resolve_net_config(const std::string& spec) {
  if (spec == "desk" || spec == "full" || spec == "tiny") return net_config_preset(spec);
  return parse_net_config(read_all(spec));
}

void write_output(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    std::ofstream f(out, std::ios::binary);
    if (!f) throw Error(ErrorCode::io, "cannot write " + out);
    f << text;
  }
}

std::vector<Method> parse_methods(const std::vector<std::string>& names) {
  std::vector<Method> out;
  for (const auto& n : names) out.push_back(parse_method(n));
  return out;
}

ColormapExtractor make_extractor(const std::string& method, const std::optional<Extractor>& cnn,
                                 std::uint64_t seed) {
  switch (parse_method(method)) {
    case Method::cnn:
      if (!cnn) throw Error(ErrorCode::invalid_argument, "the cnn method requires --weights");
      return [&cnn](const RgbImage& img) { return cnn->extract(img).colormap; };
    case Method::palette:
      return [seed](const RgbImage& img) { return palette_extract(img, 5, seed); };
    case Method::sequence:
      return [](const RgbImage& img) { return sequence_extract(img); };
    case Method::truth:
      break;
  }
  throw Error(ErrorCode::invalid_argument, "method '" + method + "' cannot extract from an image");
}

std::optional<Extractor> load_extractor(const std::string& weights) {
  if (weights.empty()) return std::nullopt;
  return Extractor(load_weights(weights));
}

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("chromex");
  logger->set_pattern("[%H:%M:%S] [%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("CHROMEX_LOG")) {
    spdlog::set_level(spdlog::level::from_str(env));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chromex: colormap extraction from chart images", "chromex"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Print help for every subcommand");
  app.footer("Environment: CHROMEX_LOG=trace|debug|info|warn|error|off sets the log level.");

  // generate
  std::string gen_config;
  std::string gen_out;
  std::optional<std::uint64_t> gen_seed;
  std::optional<std::size_t> gen_count;
  int gen_jobs = 1;
  auto* gen = app.add_subcommand("generate", "Render a synthetic chart corpus with a JSONL manifest");
  gen->add_option("--config", gen_config, "Corpus config JSON (default: the desk corpus)")->check(CLI::ExistingFile);
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--seed", gen_seed, "Override the corpus seed");
  gen->add_option("--count", gen_count, "Cap on the number of records");
  gen->add_option("--jobs", gen_jobs, "Worker threads")->check(CLI::PositiveNumber);

  // train
  std::string tr_manifest;
  std::string tr_config = "desk";
  std::string tr_out;
  std::string tr_loss_csv;
  std::string tr_init;
  TrainOptions tr_opts;
  std::optional<std::uint64_t> tr_seed;
  bool tr_no_aspp = false;
  bool tr_no_eval = false;
  auto* tr = app.add_subcommand("train", "Train the network on the train split of a manifest");
  tr->add_option("--manifest", tr_manifest, "Corpus manifest (JSONL)")->required()->check(CLI::ExistingFile);
  tr->add_option("--config", tr_config, "Network preset (desk, full, tiny) or config JSON")->capture_default_str();
  tr->add_option("--weights", tr_init, "Continue from these weights instead of a fresh init")
      ->check(CLI::ExistingFile);
  tr->add_option("--out", tr_out, "Output weights file")->required();
  tr->add_option("--iterations", tr_opts.iterations, "Training iterations")->capture_default_str();
  tr->add_option("--batch", tr_opts.batch, "Batch size")->capture_default_str()->check(CLI::PositiveNumber);
  tr->add_option("--lr", tr_opts.lr, "Adam learning rate")->capture_default_str()->check(CLI::PositiveNumber);
  tr->add_option("--log-every", tr_opts.log_every, "Iterations between loss reports")->capture_default_str()
      ->check(CLI::PositiveNumber);
  tr->add_option("--eval-every", tr_opts.eval_every, "Test-split loss on every n-th report")->capture_default_str()
      ->check(CLI::PositiveNumber);
  tr->add_option("--loss-csv", tr_loss_csv, "Write the loss curve as CSV");
  tr->add_option("--seed", tr_seed, "Seed for weight init and batch order");
  tr->add_option("--jobs", tr_opts.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  tr->add_flag("--no-aspp", tr_no_aspp, "Disable the ASPP module");
  tr->add_flag("--no-eval", tr_no_eval, "Skip the test-split loss");

  // extract
  std::string ex_image;
  std::string ex_weights;
  std::string ex_method = "cnn";
  std::string ex_out;
  std::string ex_prediction;
  std::uint64_t ex_seed = 1;
  auto* ex = app.add_subcommand("extract", "Extract a colormap from a chart image");
  ex->add_option("image", ex_image, "Input PNG")->required()->check(CLI::ExistingFile);
  ex->add_option("--weights", ex_weights, "Network weights (cnn method)")->check(CLI::ExistingFile);
  ex->add_option("--method", ex_method, "cnn, palette or sequence")->capture_default_str();
  ex->add_option("--out", ex_out, "Output colormap JSON (default: stdout)");
  ex->add_option("--prediction", ex_prediction, "Also write the raw 10x256 prediction as PNG");
  ex->add_option("--seed", ex_seed, "Seed for the palette baseline")->capture_default_str();

  // eval
  std::string ev_manifest;
  std::string ev_weights;
  std::vector<std::string> ev_methods{"cnn", "palette", "sequence"};
  std::string ev_out;
  int ev_jobs = 1;
  auto* ev = app.add_subcommand("eval", "Score methods on the test split of a manifest");
  ev->add_option("--manifest", ev_manifest, "Corpus or import manifest (JSONL)")->required()->check(CLI::ExistingFile);
  ev->add_option("--weights", ev_weights, "Network weights (cnn method)")->check(CLI::ExistingFile);
  ev->add_option("--method", ev_methods, "Methods: cnn, palette, sequence, truth")->capture_default_str()->delimiter(',');
  ev->add_option("--out", ev_out, "Report directory (summary.json, records.csv, summary.md)")->required();
  ev->add_option("--jobs", ev_jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);

  // transfer
  std::string tf_reference;
  std::string tf_target;
  std::string tf_weights;
  std::string tf_method = "cnn";
  std::string tf_out;
  std::uint64_t tf_seed = 1;
  auto* tf = app.add_subcommand("transfer", "Recolor a target chart with a reference chart's colors");
  tf->add_option("--reference", tf_reference, "Reference PNG")->required()->check(CLI::ExistingFile);
  tf->add_option("--target", tf_target, "Target PNG")->required()->check(CLI::ExistingFile);
  tf->add_option("--weights", tf_weights, "Network weights (cnn method)")->check(CLI::ExistingFile);
  tf->add_option("--method", tf_method, "Extractor: cnn or palette")->capture_default_str();
  tf->add_option("--out", tf_out, "Output PNG")->required();
  tf->add_option("--seed", tf_seed, "Seed for the palette baseline")->capture_default_str();

  // remap
  std::string rm_colormap;
  double rm_p = 0.5;
  std::string rm_out;
  auto* rm = app.add_subcommand("remap", "Move the midpoint color of a continuous colormap");
  rm->add_option("--colormap", rm_colormap, "Input colormap JSON")->required()->check(CLI::ExistingFile);
  rm->add_option("--p", rm_p, "Slider position in (0,1); clamped to [0.01, 0.99]")->capture_default_str();
  rm->add_option("--out", rm_out, "Output colormap JSON (default: stdout)");

  // recolor
  std::string rc_image;
  std::string rc_old;
  std::string rc_new;
  std::string rc_out;
  auto* rc = app.add_subcommand("recolor", "Re-encode a chart from one colormap to another");
  rc->add_option("image", rc_image, "Input PNG")->required()->check(CLI::ExistingFile);
  rc->add_option("--old", rc_old, "Colormap the image uses (JSON)")->required()->check(CLI::ExistingFile);
  rc->add_option("--new", rc_new, "Replacement colormap (JSON)")->required()->check(CLI::ExistingFile);
  rc->add_option("--out", rc_out, "Output PNG")->required();

  // serve
  std::string sv_weights;
  std::string sv_host = "127.0.0.1";
  int sv_port = 8080;
  double sv_max_mb = 8.0;
  std::string sv_static;
  std::string sv_cors = "*";
  int sv_jobs = 4;
  auto* sv = app.add_subcommand("serve", "Run the HTTP API");
  sv->add_option("--weights", sv_weights, "Network weights")->required()->check(CLI::ExistingFile);
  sv->add_option("--host", sv_host, "Bind address")->capture_default_str();
  sv->add_option("--port", sv_port, "TCP port")->capture_default_str()->check(CLI::Range(1, 65535));
  sv->add_option("--max-upload-mb", sv_max_mb, "Request size cap in MB")->capture_default_str()->check(CLI::PositiveNumber);
  sv->add_option("--static", sv_static, "Directory served at / (the web UI bundle)")->check(CLI::ExistingDirectory);
  sv->add_option("--cors-origin", sv_cors, "Access-Control-Allow-Origin value")->capture_default_str();
  sv->add_option("--jobs", sv_jobs, "Request handler threads")->capture_default_str()->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);
  setup_logging();

  try {
    if (gen->parsed()) {
      CorpusConfig cfg = gen_config.empty() ? default_corpus_config() : load_corpus_config(gen_config);
      if (gen_seed) cfg.seed = *gen_seed;
      if (gen_count) cfg.count = *gen_count;
      cfg.jobs = gen_jobs;
      const auto records = generate_corpus(cfg, gen_out);
      std::size_t test = 0;
      for (const auto& r : records) test += r.split == Split::test;
      spdlog::info("wrote {} images ({} test) to {}", records.size(), test, gen_out);
    } else if (tr->parsed()) {
      const auto manifest = read_manifest(tr_manifest);
      std::optional<NetworkWeights> init;
      NetConfig config;
      if (!tr_init.empty()) {
        init = load_weights(tr_init);
        config = init->config;
      } else {
        config = resolve_net_config(tr_config);
        if (tr_no_aspp) config.aspp_enabled = false;
        if (tr_seed) config.seed = *tr_seed;
      }
      if (tr_seed) tr_opts.seed = *tr_seed;
      const auto samples = load_samples(manifest, Split::train, config, tr_opts.jobs);
      if (samples.empty()) throw Error(ErrorCode::empty_input, "empty train split");
      std::vector<TrainingSample> eval;
      if (!tr_no_eval) eval = load_samples(manifest, Split::test, config, tr_opts.jobs);
      spdlog::info("training on {} samples ({} eval), {} iterations", samples.size(), eval.size(),
                   tr_opts.iterations);
      tr_opts.on_log = [](const LossPoint& p) {
        if (p.eval_loss) {
          std::cout << "iter " << p.iteration << " loss " << p.loss << " eval " << *p.eval_loss << std::endl;
        } else {
          std::cout << "iter " << p.iteration << " loss " << p.loss << std::endl;
        }
      };
      const auto* eval_ptr = eval.empty() ? nullptr : &eval;
      const TrainResult result = init ? train(samples, std::move(*init), tr_opts, eval_ptr)
                                      : train(samples, config, tr_opts, eval_ptr);
      save_weights(tr_out, result.weights);
      if (!tr_loss_csv.empty()) write_loss_csv(tr_loss_csv, result.curve);
      spdlog::info("saved {} ({})", tr_out, weights_id(result.weights));
    } else if (ex->parsed()) {
      const RgbImage img = read_png(ex_image);
      Colormap out;
      if (parse_method(ex_method) == Method::cnn) {
        const auto cnn = load_extractor(ex_weights);
        if (!cnn) throw Error(ErrorCode::invalid_argument, "the cnn method requires --weights");
        const Extraction e = cnn->extract(img);
        if (!ex_prediction.empty()) write_png(ex_prediction, to_rgb_image(e.prediction));
        spdlog::debug("extraction took {:.3f} s", e.seconds);
        out = e.colormap;
      } else {
        out = make_extractor(ex_method, std::nullopt, ex_seed)(img);
      }
      write_output(ex_out, colormap_to_json(out, 1) + "\n");
    } else if (ev->parsed()) {
      const auto methods = parse_methods(ev_methods);
      const auto cnn = load_extractor(ev_weights);
      const EvalReport report = evaluate(read_manifest(ev_manifest), methods, cnn ? &*cnn : nullptr, ev_jobs);
      fs::create_directories(ev_out);
      write_eval_json(fs::path(ev_out) / "summary.json", report);
      write_eval_csv(fs::path(ev_out) / "records.csv", report);
      write_eval_markdown(fs::path(ev_out) / "summary.md", report);
      std::cout << eval_markdown(report);
    } else if (tf->parsed()) {
      const auto cnn = load_extractor(tf_weights);
      const auto extract = make_extractor(tf_method, cnn, tf_seed);
      write_png(tf_out, transfer(read_png(tf_reference), read_png(tf_target), extract));
    } else if (rm->parsed()) {
      write_output(rm_out, colormap_to_json(remap(read_colormap_file(rm_colormap), rm_p), 1) + "\n");
    } else if (rc->parsed()) {
      write_png(rc_out, recolor_image(read_png(rc_image), read_colormap_file(rc_old), read_colormap_file(rc_new)));
    } else if (sv->parsed()) {
      auto extractor = std::make_shared<const Extractor>(load_weights(sv_weights));
      ServiceOptions opts;
      opts.max_upload_bytes = static_cast<std::size_t>(sv_max_mb * 1024.0 * 1024.0);
      opts.cors_origin = sv_cors;
      const Service service(extractor, opts);
      httplib::Server server;
      server.new_task_queue = [sv_jobs] { return new httplib::ThreadPool(static_cast<std::size_t>(sv_jobs)); };
      service.mount(server);
      if (!sv_static.empty()) server.set_mount_point("/", sv_static);
      spdlog::info("serving weights {} on http://{}:{}", service.weights_id(), sv_host, sv_port);
      if (!server.listen(sv_host, sv_port)) {
        throw Error(ErrorCode::io, "cannot listen on " + sv_host + ":" + std::to_string(sv_port));
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << error_code_name(e.code()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
