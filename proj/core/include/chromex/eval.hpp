#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "chromex/chartgen.hpp"
#include "chromex/color.hpp"
#include "chromex/pipeline.hpp"

namespace chromex {

struct DtwResult {
  double raw = 0.0;         // minimal summed delta_norm over a monotone coupling
  double normalized = 0.0;  // raw divided by the coupling length
  std::vector<std::pair<int, int>> coupling;  // zero-based (gt, out) index pairs
};

/// Dynamic time warping with the symmetric step pattern (diagonal, horizontal, vertical).
/// Among equal-cost couplings the shortest is kept. Throws empty_input for empty inputs.
DtwResult dtw_distance(std::span<const LabColor> gt, std::span<const LabColor> out);
DtwResult dtw_distance(const Colormap& gt, const Colormap& out);

/// The better of dtw_distance against out and against its reversal (in which case the
/// coupling indexes the reversed colors).
DtwResult dtw_oriented(const Colormap& gt, const Colormap& out);

struct EvalRecord {
  std::string id;
  std::string chart_type;
  ColormapKind kind = ColormapKind::discrete;  // ground truth
  std::string method;
  std::optional<ColormapKind> predicted_kind;  // absent when extraction failed
  double d_dtw_raw = 0.0;
  double d_dtw_norm = 0.0;
  std::string error;  // non-empty when extraction failed; such records are left out of the means
};

/// One (method, group) cell. Groups are "overall", "kind=<kind>" and "chart=<type>".
struct GroupStats {
  std::string method;
  std::string group;
  std::size_t n = 0;  // scored records
  std::size_t failures = 0;
  double mean = 0.0;  // of d_dtw_norm
  double stddev = 0.0;  // sample standard deviation
  double ci_low = 0.0;  // 95% normal-approximation interval
  double ci_high = 0.0;
  double mean_raw = 0.0;
  double kind_accuracy = 0.0;  // over scored records
};

struct WelchTest {
  std::string group;
  std::string method_a;
  std::string method_b;
  double t = 0.0;   // positive when method_a has the larger mean
  double df = 0.0;  // Welch-Satterthwaite degrees of freedom
};

struct EvalReport {
  std::vector<EvalRecord> records;
  std::vector<GroupStats> groups;
  std::vector<WelchTest> tests;

  const GroupStats* find(std::string_view method, std::string_view group) const;
};

/// Scores every test-split record with each method. The palette baseline is only run on
/// discrete and the sequence baseline only on continuous ground truth. Baseline continuous
/// outputs are scored orientation-free; every other output is scored as ordered.
/// Throws empty_input for an empty test split and invalid_argument when the cnn method is
/// requested without an extractor.
EvalReport evaluate(const std::vector<ManifestRecord>& manifest, const std::vector<Method>& methods,
                    const Extractor* cnn = nullptr, int jobs = 1);

/// Deterministic aggregation of records into group statistics and pairwise Welch tests.
EvalReport summarize(std::vector<EvalRecord> records);

void write_eval_json(const std::filesystem::path& path, const EvalReport& report);
void write_eval_csv(const std::filesystem::path& path, const EvalReport& report);
void write_eval_markdown(const std::filesystem::path& path, const EvalReport& report);
std::string eval_markdown(const EvalReport& report);

}  // namespace chromex
