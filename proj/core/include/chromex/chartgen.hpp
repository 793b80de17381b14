#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chromex/color.hpp"
#include "chromex/image.hpp"

namespace chromex {

// ---------------------------------------------------------------------------
// Synthetic data

enum class Distribution {
  normal,          // params: mean, stddev
  beta,            // params: alpha, beta
  poisson,         // params: lambda
  uniform,         // params: lo, hi
  independent,     // 2D: x, y independent uniform
  linear,          // 2D: y = x + noise; params: noise stddev
  inverse_linear,  // 2D: y = 1 - x + noise; params: noise stddev
};

std::string_view distribution_name(Distribution d);
Distribution parse_distribution(std::string_view name);
bool is_paired(Distribution d);

struct DataSpec {
  Distribution kind = Distribution::normal;
  std::vector<double> params;  // empty = family defaults
  int n_points = 20;
  int n_categories = 5;
  std::uint64_t seed = 0;

  friend bool operator==(const DataSpec&, const DataSpec&) = default;
};

/// Column-major numeric table. Paired tables hold (x, y) column pairs, one per category;
/// unpaired tables hold one column per category.
struct DataTable {
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;
  bool paired = false;

  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
  std::size_t categories() const { return paired ? columns.size() / 2 : columns.size(); }
};

/// Deterministic in spec.seed. Throws invalid_argument for bad parameters or counts.
DataTable sample_data(const DataSpec& spec);

/// Header row plus numeric columns; blank lines are skipped.
DataTable load_csv_table(const std::filesystem::path& path);
DataTable parse_csv_table(std::string_view text);

// ---------------------------------------------------------------------------
// Rendering

enum class ChartType { line, pie, grouped_bar, stacked_bar, scatter, stream, heatmap, region_map };

inline constexpr ChartType kAllChartTypes[] = {
    ChartType::line,    ChartType::pie,    ChartType::grouped_bar, ChartType::stacked_bar,
    ChartType::scatter, ChartType::stream, ChartType::heatmap,     ChartType::region_map};

std::string_view chart_type_name(ChartType t);
ChartType parse_chart_type(std::string_view name);

/// Heatmaps and region maps take continuous maps, every other chart discrete ones.
ColormapKind required_kind(ChartType t);

struct ChartStyle {
  ChartType type = ChartType::pie;
  int width = 512;
  int height = 256;
  Rgb8 background{255, 255, 255};
  bool antialias = true;
  bool stroke = false;          // outline shapes in the background color
  double stroke_width = 1.0;
  double line_width = 2.5;      // line charts
  double marker_radius = 4.0;   // scatter plots
  double bar_spacing = 0.2;     // fraction of a slot left empty between bars
  bool axes = true;             // black axis lines on cartesian charts
};

/// Draws the chart into a width x height image. Discrete charts color category c with
/// colors[c % m]; continuous charts color a value v in [0,1] with sample(cmap, v).
/// Throws kind_mismatch for an incompatible colormap and invalid_argument for empty data.
RgbImage render_chart(const ChartStyle& style, const DataTable& data, const Colormap& cmap);

/// The fixed tiling behind region maps: polygons in unit coordinates.
const std::vector<std::vector<std::array<double, 2>>>& region_map_tiles();

// ---------------------------------------------------------------------------
// Corpus

enum class Split { train, test };
std::string_view split_name(Split s);

struct ManifestRecord {
  std::string id;
  std::filesystem::path image_path;  // absolute after read_manifest
  std::string colormap_name;
  std::optional<Colormap> colormap;  // inline colormap, if the record carried one
  std::string chart_type;
  std::optional<DataSpec> data_spec;
  std::uint64_t seed = 0;
  Split split = Split::train;
};

struct CorpusConfig {
  std::uint64_t seed = 1;
  std::vector<std::string> colormaps;
  std::vector<ChartType> chart_types;
  std::vector<DataSpec> data;        // templates; counts and seeds are filled per record
  int data_seeds = 1;                // variants per (chart, colormap, data) combination
  std::optional<std::size_t> count;  // cap; absent = full product
  double test_fraction = 0.1;
  bool antialias = true;
  bool randomize_style = true;
  int jobs = 1;
};

CorpusConfig parse_corpus_config(std::string_view json);
CorpusConfig load_corpus_config(const std::filesystem::path& path);

/// The desk-scale default: 2,000 images over 8 discrete and 8 continuous maps.
CorpusConfig default_corpus_config();

/// Renders every record into out_dir/images and writes out_dir/manifest.jsonl.
/// Incompatible (chart, colormap kind) pairs are skipped.
std::vector<ManifestRecord> generate_corpus(const CorpusConfig& config,
                                            const std::filesystem::path& out_dir);

/// Re-renders one record exactly as generate_corpus would.
RgbImage render_record(const CorpusConfig& config, const ManifestRecord& record);

std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestRecord>& records);

/// The colormap a record refers to: inline if present, else looked up by name.
const Colormap& record_colormap(const ManifestRecord& record);

}  // namespace chromex
