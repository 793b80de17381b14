#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <json.hpp>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "chromex/chartgen.hpp"
#include "chromex/colormap_io.hpp"
#include "chromex/error.hpp"
#include "internal/files.hpp"
#include "internal/json_colormap.hpp"

namespace chromex {

using nlohmann::json;

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t record_seed(std::uint64_t master, std::size_t index) {
  return splitmix64(master ^ splitmix64(static_cast<std::uint64_t>(index) + 1));
}

json data_spec_to_json(const DataSpec& spec) {
  return {{"kind", distribution_name(spec.kind)},
          {"params", spec.params},
          {"n_points", spec.n_points},
          {"n_categories", spec.n_categories},
          {"seed", spec.seed}};
}

DataSpec data_spec_from_json(const json& j) {
  DataSpec spec;
  spec.kind = parse_distribution(j.at("kind").get<std::string>());
  spec.params = j.value("params", std::vector<double>{});
  spec.n_points = j.value("n_points", spec.n_points);
  spec.n_categories = j.value("n_categories", spec.n_categories);
  spec.seed = j.value("seed", std::uint64_t{0});
  return spec;
}

struct Combo {
  ChartType chart;
  std::size_t colormap;
  std::size_t data;
  int variant;
};

/// Fills per-chart counts and the seed into a data template.
DataSpec concrete_spec(DataSpec spec, ChartType chart, const Colormap& cmap, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto pick = [&rng](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  spec.seed = seed;
  spec.n_categories = static_cast<int>(cmap.size());
  switch (chart) {
    case ChartType::line: spec.n_points = pick(8, 30); break;
    case ChartType::pie: spec.n_points = 1; break;
    case ChartType::grouped_bar: spec.n_points = pick(3, 6); break;
    case ChartType::stacked_bar: spec.n_points = pick(4, 10); break;
    case ChartType::scatter: spec.n_points = pick(15, 50); break;
    case ChartType::stream: spec.n_points = pick(6, 16); break;
    case ChartType::heatmap:
      spec.n_categories = pick(6, 16);
      spec.n_points = is_paired(spec.kind) ? pick(200, 600) : pick(12, 32);
      break;
    case ChartType::region_map:
      spec.n_categories = 1;
      spec.n_points = 50;
      break;
  }
  return spec;
}

ChartStyle record_style(const CorpusConfig& config, ChartType chart, std::uint64_t seed) {
  ChartStyle style;
  style.type = chart;
  style.antialias = config.antialias;
  if (!config.randomize_style) return style;
  std::mt19937_64 rng(splitmix64(seed ^ 0x5157594C45ull));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  style.line_width = 1.5 + 2.5 * u(rng);
  style.marker_radius = 2.5 + 3.5 * u(rng);
  style.bar_spacing = 0.1 + 0.3 * u(rng);
  style.stroke = u(rng) < 0.5;
  style.stroke_width = 0.5 + u(rng);
  style.axes = u(rng) < 0.5;
  return style;
}

std::vector<Combo> select_combos(const CorpusConfig& config,
                                 const std::vector<const Colormap*>& cmaps) {
  std::vector<Combo> discrete;
  std::vector<Combo> continuous;
  for (ChartType chart : config.chart_types) {
    for (std::size_t m = 0; m < cmaps.size(); ++m) {
      if (required_kind(chart) != cmaps[m]->kind) continue;  // non-practical pairing
      for (std::size_t d = 0; d < config.data.size(); ++d) {
        for (int v = 0; v < config.data_seeds; ++v) {
          (cmaps[m]->is_continuous() ? continuous : discrete).push_back({chart, m, d, v});
        }
      }
    }
  }
  if (!config.count) {
    std::vector<Combo> all = discrete;
    all.insert(all.end(), continuous.begin(), continuous.end());
    return all;
  }

  // Capped corpora alternate kinds and cycle through shuffled combinations, so a small
  // count still spans charts, colormaps and distributions.
  std::mt19937_64 rng(splitmix64(config.seed));
  std::shuffle(discrete.begin(), discrete.end(), rng);
  std::shuffle(continuous.begin(), continuous.end(), rng);
  std::vector<Combo> out;
  std::size_t di = 0;
  std::size_t ci = 0;
  for (std::size_t i = 0; i < *config.count; ++i) {
    const bool want_continuous = (i % 2 == 1 && !continuous.empty()) || discrete.empty();
    if (want_continuous) {
      if (continuous.empty()) break;
      out.push_back(continuous[ci++ % continuous.size()]);
    } else {
      out.push_back(discrete[di++ % discrete.size()]);
    }
  }
  return out;
}

json record_to_json(const ManifestRecord& r, const std::filesystem::path& base) {
  json j;
  j["id"] = r.id;
  std::filesystem::path image = r.image_path;
  if (!base.empty() && image.is_absolute()) image = image.lexically_relative(base);
  j["image_path"] = image.generic_string();
  j["colormap_name"] = r.colormap_name;
  if (r.colormap) j["colormap"] = internal::colormap_to_json_value(*r.colormap);
  j["chart_type"] = r.chart_type;
  if (r.data_spec) j["data_spec"] = data_spec_to_json(*r.data_spec);
  j["seed"] = r.seed;
  j["split"] = split_name(r.split);
  return j;
}

}  // namespace

std::string_view split_name(Split s) { return s == Split::train ? "train" : "test"; }

CorpusConfig parse_corpus_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::corrupt, std::string("corpus config: ") + e.what());
  }
  try {
    CorpusConfig c;
    c.seed = j.value("seed", c.seed);
    c.colormaps = j.at("colormaps").get<std::vector<std::string>>();
    for (const auto& name : j.at("chart_types")) {
      c.chart_types.push_back(parse_chart_type(name.get<std::string>()));
    }
    for (const auto& d : j.at("data")) c.data.push_back(data_spec_from_json(d));
    c.data_seeds = j.value("data_seeds", c.data_seeds);
    if (j.contains("count") && !j["count"].is_null()) c.count = j["count"].get<std::size_t>();
    c.test_fraction = j.value("test_fraction", c.test_fraction);
    c.antialias = j.value("antialias", c.antialias);
    c.randomize_style = j.value("randomize_style", c.randomize_style);
    c.jobs = j.value("jobs", c.jobs);
    if (c.data_seeds < 1) throw Error(ErrorCode::invalid_argument, "data_seeds must be >= 1");
    if (c.test_fraction < 0.0 || c.test_fraction > 1.0) {
      throw Error(ErrorCode::invalid_argument, "test_fraction must lie in [0,1]");
    }
    return c;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::invalid_argument, std::string("corpus config: ") + e.what());
  }
}

CorpusConfig load_corpus_config(const std::filesystem::path& path) {
  return parse_corpus_config(internal::read_text_file(path));
}

CorpusConfig default_corpus_config() {
  CorpusConfig c;
  c.seed = 2021;
  c.count = 2000;
  c.colormaps = {"Set1_3",  "Dark2_4", "tab10_5", "Set2_6",   "Paired_7", "Dark2_8",
                 "Paired_9", "tab10_10", "viridis", "plasma",  "inferno",  "cividis",
                 "YlGnBu",  "RdBu",    "Spectral", "BuPu"};
  c.chart_types.assign(std::begin(kAllChartTypes), std::end(kAllChartTypes));
  for (Distribution d : {Distribution::normal, Distribution::beta, Distribution::poisson,
                         Distribution::uniform, Distribution::independent, Distribution::linear,
                         Distribution::inverse_linear}) {
    c.data.push_back({d, {}, 20, 5, 0});
  }
  c.data_seeds = 10;
  return c;
}

const Colormap& record_colormap(const ManifestRecord& record) {
  return record.colormap ? *record.colormap : find_colormap(record.colormap_name);
}

RgbImage render_record(const CorpusConfig& config, const ManifestRecord& record) {
  if (!record.data_spec) {
    throw Error(ErrorCode::invalid_argument, "record " + record.id + " has no data spec");
  }
  const ChartType chart = parse_chart_type(record.chart_type);
  return render_chart(record_style(config, chart, record.seed), sample_data(*record.data_spec),
                      record_colormap(record));
}

std::vector<ManifestRecord> generate_corpus(const CorpusConfig& config,
                                            const std::filesystem::path& out_dir) {
  std::vector<const Colormap*> cmaps;
  for (const auto& name : config.colormaps) cmaps.push_back(&find_colormap(name));
  if (config.data.empty()) throw Error(ErrorCode::invalid_argument, "corpus config has no data");
  const std::vector<Combo> combos = select_combos(config, cmaps);

  std::vector<ManifestRecord> records(combos.size());
  for (std::size_t i = 0; i < combos.size(); ++i) {
    const Combo& c = combos[i];
    ManifestRecord& r = records[i];
    char id[16];
    std::snprintf(id, sizeof id, "r%06zu", i);
    r.id = id;
    r.image_path = out_dir / "images" / (r.id + ".png");
    r.colormap_name = cmaps[c.colormap]->name;
    r.chart_type = std::string(chart_type_name(c.chart));
    r.seed = record_seed(config.seed, i);
    r.data_spec = concrete_spec(config.data[c.data], c.chart, *cmaps[c.colormap], r.seed);
  }

  // Seeded 90/10 split: the first ceil-rounded test_fraction of a shuffled index list is test.
  std::vector<std::size_t> order(records.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(splitmix64(config.seed ^ 0x53504C4954ull));
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_test =
      static_cast<std::size_t>(std::llround(config.test_fraction * static_cast<double>(records.size())));
  for (std::size_t k = 0; k < n_test; ++k) records[order[k]].split = Split::test;

  std::error_code ec;
  std::filesystem::create_directories(out_dir / "images", ec);
  if (ec) {
    throw Error(ErrorCode::io, "cannot create '" + (out_dir / "images").string() + "': " +
                                   ec.message());
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto worker = [&] {
    for (std::size_t i = next++; i < records.size(); i = next++) {
      try {
        write_png(records[i].image_path, render_record(config, records[i]));
      } catch (...) {
        const std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = records.size();
      }
    }
  };
  const int jobs = std::max(1, config.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  write_manifest(out_dir / "manifest.jsonl", records);
  return records;
}

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestRecord>& records) {
  std::string out;
  const std::filesystem::path base = std::filesystem::absolute(path).parent_path();
  for (const auto& r : records) {
    ManifestRecord copy = r;
    copy.image_path = std::filesystem::absolute(r.image_path);
    out += record_to_json(copy, base).dump();
    out += '\n';
  }
  internal::write_text_file(path, out);
}

std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path) {
  const std::string text = internal::read_text_file(path);
  const std::filesystem::path base = std::filesystem::absolute(path).parent_path();
  std::vector<ManifestRecord> records;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      ManifestRecord r;
      r.id = j.value("id", "line" + std::to_string(line_no));
      r.image_path = j.at("image_path").get<std::string>();
      if (r.image_path.is_relative()) r.image_path = base / r.image_path;
      if (j.contains("colormap")) r.colormap = internal::colormap_from_json_value(j["colormap"]);
      r.colormap_name = j.value("colormap_name", r.colormap ? r.colormap->name : std::string());
      if (!r.colormap && r.colormap_name.empty()) {
        throw Error(ErrorCode::corrupt, "record has neither colormap nor colormap_name");
      }
      r.chart_type = j.value("chart_type", "unknown");
      if (j.contains("data_spec")) r.data_spec = data_spec_from_json(j["data_spec"]);
      r.seed = j.value("seed", std::uint64_t{0});
      const std::string split = j.value("split", "test");
      if (split != "train" && split != "test") {
        throw Error(ErrorCode::corrupt, "split must be train or test");
      }
      r.split = split == "train" ? Split::train : Split::test;
      records.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::corrupt,
                  path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(e.code(), path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

}  // namespace chromex
