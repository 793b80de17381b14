#include <charconv>
#include <cmath>
#include <random>
#include <sstream>

#include "chromex/chartgen.hpp"
#include "chromex/error.hpp"
#include "internal/files.hpp"

namespace chromex {

namespace {

struct DistributionInfo {
  Distribution kind;
  std::string_view name;
};

constexpr DistributionInfo kDistributions[] = {
    {Distribution::normal, "normal"},
    {Distribution::beta, "beta"},
    {Distribution::poisson, "poisson"},
    {Distribution::uniform, "uniform"},
    {Distribution::independent, "independent"},
    {Distribution::linear, "linear"},
    {Distribution::inverse_linear, "inverse-linear"},
};

std::vector<double> resolve_params(const DataSpec& spec) {
  std::vector<double> defaults;
  switch (spec.kind) {
    case Distribution::normal: defaults = {0.0, 1.0}; break;
    case Distribution::beta: defaults = {2.0, 5.0}; break;
    case Distribution::poisson: defaults = {4.0}; break;
    case Distribution::uniform: defaults = {0.0, 1.0}; break;
    case Distribution::independent: break;
    case Distribution::linear:
    case Distribution::inverse_linear: defaults = {0.1}; break;
  }
  if (spec.params.empty()) return defaults;
  if (spec.params.size() != defaults.size()) {
    throw Error(ErrorCode::invalid_argument,
                std::string(distribution_name(spec.kind)) + " takes " +
                    std::to_string(defaults.size()) + " parameter(s)");
  }
  for (double p : spec.params) {
    if (!std::isfinite(p)) throw Error(ErrorCode::invalid_argument, "non-finite parameter");
  }
  return spec.params;
}

void check(bool ok, const char* message) {
  if (!ok) throw Error(ErrorCode::invalid_argument, message);
}

}  // namespace

std::string_view distribution_name(Distribution d) {
  for (const auto& info : kDistributions) {
    if (info.kind == d) return info.name;
  }
  return "unknown";
}

Distribution parse_distribution(std::string_view name) {
  for (const auto& info : kDistributions) {
    if (info.name == name) return info.kind;
  }
  if (name == "inverse_linear") return Distribution::inverse_linear;
  throw Error(ErrorCode::invalid_argument, "unknown distribution '" + std::string(name) + "'");
}

bool is_paired(Distribution d) {
  return d == Distribution::independent || d == Distribution::linear ||
         d == Distribution::inverse_linear;
}

DataTable sample_data(const DataSpec& spec) {
  check(spec.n_points >= 1, "n_points must be >= 1");
  check(spec.n_categories >= 1, "n_categories must be >= 1");
  const std::vector<double> p = resolve_params(spec);
  std::mt19937_64 rng(spec.seed);
  const auto n = static_cast<std::size_t>(spec.n_points);

  DataTable table;
  table.paired = is_paired(spec.kind);
  for (int c = 0; c < spec.n_categories; ++c) {
    std::vector<double> col(n);
    switch (spec.kind) {
      case Distribution::normal: {
        check(p[1] > 0.0, "normal: stddev must be positive");
        std::normal_distribution<double> dist(p[0], p[1]);
        for (double& v : col) v = dist(rng);
        break;
      }
      case Distribution::beta: {
        check(p[0] > 0.0 && p[1] > 0.0, "beta: alpha and beta must be positive");
        std::gamma_distribution<double> ga(p[0], 1.0);
        std::gamma_distribution<double> gb(p[1], 1.0);
        for (double& v : col) {
          const double x = ga(rng);
          const double y = gb(rng);
          v = x + y > 0.0 ? x / (x + y) : 0.5;
        }
        break;
      }
      case Distribution::poisson: {
        check(p[0] > 0.0, "poisson: lambda must be positive");
        std::poisson_distribution<int> dist(p[0]);
        for (double& v : col) v = dist(rng);
        break;
      }
      case Distribution::uniform: {
        check(p[0] < p[1], "uniform: lo must be below hi");
        std::uniform_real_distribution<double> dist(p[0], p[1]);
        for (double& v : col) v = dist(rng);
        break;
      }
      case Distribution::independent:
      case Distribution::linear:
      case Distribution::inverse_linear: {
        const double noise = p.empty() ? 0.0 : p[0];
        check(noise >= 0.0, "noise must be non-negative");
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::normal_distribution<double> jitter(0.0, noise > 0.0 ? noise : 1.0);
        // Categories are offset so their clouds do not coincide.
        const double shift = 0.3 * c;
        std::vector<double> ys(n);
        for (std::size_t i = 0; i < n; ++i) {
          const double x = unit(rng);
          double y = unit(rng);
          if (spec.kind == Distribution::linear) y = x + shift + (noise > 0 ? jitter(rng) : 0.0);
          if (spec.kind == Distribution::inverse_linear) {
            y = 1.0 - x + shift + (noise > 0 ? jitter(rng) : 0.0);
          }
          col[i] = x;
          ys[i] = y;
        }
        table.names.push_back("x" + std::to_string(c));
        table.columns.push_back(std::move(col));
        table.names.push_back("y" + std::to_string(c));
        table.columns.push_back(std::move(ys));
        continue;
      }
    }
    table.names.push_back("c" + std::to_string(c));
    table.columns.push_back(std::move(col));
  }
  return table;
}

DataTable parse_csv_table(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      const auto b = cell.find_first_not_of(" \t");
      const auto e = cell.find_last_not_of(" \t");
      cells.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(std::move(cells));
  }
  if (rows.size() < 2) throw Error(ErrorCode::empty_input, "CSV needs a header and data rows");

  DataTable table;
  table.names = rows.front();
  table.columns.assign(table.names.size(), {});
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != table.names.size()) {
      throw Error(ErrorCode::corrupt, "CSV row " + std::to_string(r + 1) + " has " +
                                          std::to_string(rows[r].size()) + " cells, expected " +
                                          std::to_string(table.names.size()));
    }
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      const std::string& s = rows[r][c];
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
        throw Error(ErrorCode::corrupt, "CSV row " + std::to_string(r + 1) + ": '" + s +
                                            "' is not a number");
      }
      table.columns[c].push_back(v);
    }
  }

  // x0,y0,x1,y1,... headers mark point clouds.
  bool paired = table.names.size() % 2 == 0;
  for (std::size_t c = 0; paired && c < table.names.size(); c += 2) {
    paired = table.names[c].starts_with('x') && table.names[c + 1].starts_with('y');
  }
  table.paired = paired;
  return table;
}

DataTable load_csv_table(const std::filesystem::path& path) {
  return parse_csv_table(internal::read_text_file(path));
}

}  // namespace chromex
