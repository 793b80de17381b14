#include "chromex/refine.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <tuple>

#include "chromex/error.hpp"

namespace chromex {

namespace {

bool canonical_less(const LabColor& x, const LabColor& y) {
  return std::tie(x.L, x.a, x.b) < std::tie(y.L, y.a, y.b);
}

bool canonical_less(const WeightedColor& x, const WeightedColor& y) {
  if (canonical_less(x.color, y.color)) return true;
  if (canonical_less(y.color, x.color)) return false;
  return x.weight < y.weight;
}

// Dense eigen-decomposition is cubic in the point count; beyond this many points, nearby
// bins are merged first. 256 output samples need far fewer points than this.
constexpr std::size_t kMaxOrderPoints = 600;

/// Merges points on a Lab grid whose cell size doubles until at most kMaxOrderPoints remain.
/// Each cell becomes its weighted mean color. Output is in canonical order.
std::vector<WeightedColor> coarsen(std::vector<WeightedColor> pts) {
  for (double cell = 2.0; pts.size() > kMaxOrderPoints; cell *= 2.0) {
    struct Acc {
      double L = 0.0, a = 0.0, b = 0.0, w = 0.0;
      std::uint64_t weight = 0;
    };
    std::map<std::tuple<long, long, long>, Acc> cells;
    for (const auto& p : pts) {
      const auto key = std::make_tuple(std::lround(std::floor(p.color.L / cell)),
                                       std::lround(std::floor(p.color.a / cell)),
                                       std::lround(std::floor(p.color.b / cell)));
      Acc& acc = cells[key];
      const double w = static_cast<double>(std::max<std::uint64_t>(p.weight, 1));
      acc.L += w * p.color.L;
      acc.a += w * p.color.a;
      acc.b += w * p.color.b;
      acc.w += w;
      acc.weight += p.weight;
    }
    std::vector<WeightedColor> merged;
    merged.reserve(cells.size());
    for (const auto& [key, acc] : cells) {
      merged.push_back({{acc.L / acc.w, acc.a / acc.w, acc.b / acc.w}, acc.weight});
    }
    pts = std::move(merged);
  }
  std::sort(pts.begin(), pts.end(), [](const auto& x, const auto& y) { return canonical_less(x, y); });
  return pts;
}

std::vector<NormLab> normalized(std::span<const WeightedColor> points) {
  std::vector<NormLab> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(normalize_lab(p.color));
  return out;
}

double distance(const LabColor& x, const LabColor& y) {
  return std::sqrt((x.L - y.L) * (x.L - y.L) + (x.a - y.a) * (x.a - y.a) + (x.b - y.b) * (x.b - y.b));
}

/// The two largest edges of the minimum spanning tree over the per-column median colors.
std::array<double, 2> profile_gaps(const ColormapImage& pred) {
  constexpr std::size_t rows = ColormapImage::kRows;
  constexpr std::size_t cols = ColormapImage::kCols;
  const auto median = [](std::array<double, rows> v) {
    std::sort(v.begin(), v.end());
    return rows % 2 ? v[rows / 2] : 0.5 * (v[rows / 2 - 1] + v[rows / 2]);
  };
  std::vector<LabColor> profile(cols);
  for (std::size_t c = 0; c < cols; ++c) {
    std::array<double, rows> L{};
    std::array<double, rows> a{};
    std::array<double, rows> b{};
    for (std::size_t r = 0; r < rows; ++r) {
      const LabColor lab = srgb_to_lab(pred.pixels[r * cols + c]);
      L[r] = lab.L;
      a[r] = lab.a;
      b[r] = lab.b;
    }
    profile[c] = {median(L), median(a), median(b)};
  }
  // Prim's algorithm on the complete graph.
  std::vector<double> best(cols, std::numeric_limits<double>::infinity());
  std::vector<bool> done(cols, false);
  std::array<double, 2> top{0.0, 0.0};
  best[0] = 0.0;
  for (std::size_t step = 0; step < cols; ++step) {
    std::size_t u = cols;
    for (std::size_t v = 0; v < cols; ++v) {
      if (!done[v] && (u == cols || best[v] < best[u])) u = v;
    }
    done[u] = true;
    if (best[u] > top[0]) {
      top = {best[u], top[0]};
    } else if (best[u] > top[1]) {
      top[1] = best[u];
    }
    for (std::size_t v = 0; v < cols; ++v) {
      if (!done[v]) best[v] = std::min(best[v], distance(profile[u], profile[v]));
    }
  }
  return top;
}

ColormapKind kind_of(const ColormapImage& pred, const std::vector<WeightedColor>& bins, const RefineConfig& cfg) {
  if (static_cast<int>(bins.size()) <= cfg.kind_threshold) return ColormapKind::discrete;
  return profile_gaps(pred)[1] >= cfg.gap_threshold ? ColormapKind::discrete : ColormapKind::continuous;
}

struct DisjointSet {
  std::vector<std::size_t> parent;
  explicit DisjointSet(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(std::size_t x, std::size_t y) {
    x = find(x);
    y = find(y);
    if (x == y) return false;
    parent[std::max(x, y)] = std::min(x, y);
    return true;
  }
};

}  // namespace

void RefineConfig::validate() const {
  if (!(filter_threshold > 0.0 && filter_threshold < 1.0) || !(dbscan_eps > 0.0) ||
      dbscan_min < 1 || kind_threshold < 1 || knn_k < 1 || !(gap_threshold > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "invalid refinement config");
  }
}

std::vector<WeightedColor> prediction_bins(const ColormapImage& pred, const RefineConfig& cfg) {
  cfg.validate();
  if (std::all_of(pred.pixels.begin(), pred.pixels.end(), [](Rgb8 p) { return p == Rgb8{}; })) {
    throw Error(ErrorCode::empty_input, "prediction is all zero");
  }
  std::vector<WeightedColor> bins = color_bins(pred.pixels);
  std::uint64_t peak = 0;
  for (const auto& b : bins) peak = std::max(peak, b.weight);
  std::erase_if(bins, [&](const WeightedColor& b) {
    return static_cast<double>(b.weight) < cfg.filter_threshold * static_cast<double>(peak);
  });
  return bins;
}

ColormapKind classify_kind(const ColormapImage& pred, const RefineConfig& cfg) {
  return kind_of(pred, prediction_bins(pred, cfg), cfg);
}

std::vector<ColorCluster> dbscan_colors(std::span<const WeightedColor> input, const RefineConfig& cfg) {
  cfg.validate();
  if (input.empty()) throw Error(ErrorCode::empty_input, "no colors to cluster");
  std::vector<WeightedColor> pts(input.begin(), input.end());
  std::sort(pts.begin(), pts.end(), [](const auto& x, const auto& y) { return canonical_less(x, y); });
  const std::size_t n = pts.size();
  const auto norm = normalized(pts);

  std::vector<std::vector<std::size_t>> nbrs(n);
  std::vector<bool> core(n, false);
  std::uint64_t peak = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t mass = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (delta_norm(norm[i], norm[j]) <= cfg.dbscan_eps) {
        nbrs[i].push_back(j);
        mass += pts[j].weight;
      }
    }
    core[i] = mass >= static_cast<std::uint64_t>(cfg.dbscan_min);
    peak = std::max(peak, pts[i].weight);
  }

  constexpr int kUnassigned = -1;
  std::vector<int> label(n, kUnassigned);
  int clusters = 0;
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (label[seed] != kUnassigned || !core[seed]) continue;
    const int id = clusters++;
    std::vector<std::size_t> frontier{seed};
    label[seed] = id;
    while (!frontier.empty()) {
      const std::size_t p = frontier.back();
      frontier.pop_back();
      if (!core[p]) continue;  // border points join but do not expand
      for (std::size_t q : nbrs[p]) {
        if (label[q] != kUnassigned) continue;
        label[q] = id;
        frontier.push_back(q);
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (label[i] == kUnassigned && 10 * pts[i].weight >= peak) label[i] = clusters++;
  }

  std::vector<ColorCluster> out(static_cast<std::size_t>(clusters));
  for (std::size_t i = 0; i < n; ++i) {
    if (label[i] == kUnassigned) continue;
    auto& c = out[static_cast<std::size_t>(label[i])];
    c.members.push_back(pts[i]);
    c.weight += pts[i].weight;
  }
  for (auto& c : out) {
    // Members are canonical, so the first maximum has the lowest (L, a, b).
    const auto heaviest = std::max_element(c.members.begin(), c.members.end(),
                                           [](const auto& x, const auto& y) { return x.weight < y.weight; });
    c.prominent = heaviest->color;
  }
  std::sort(out.begin(), out.end(),
            [](const auto& x, const auto& y) { return canonical_less(x.prominent, y.prominent); });
  return out;
}

std::vector<LabColor> laplacian_order(std::span<const WeightedColor> input, const RefineConfig& cfg) {
  cfg.validate();
  std::vector<WeightedColor> pts(input.begin(), input.end());
  std::sort(pts.begin(), pts.end(), [](const auto& x, const auto& y) { return canonical_less(x, y); });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const auto& x, const auto& y) { return x.color == y.color; }),
            pts.end());
  if (pts.size() > kMaxOrderPoints) pts = coarsen(std::move(pts));
  const std::size_t n = pts.size();
  if (n < 3) {
    throw Error(ErrorCode::insufficient_points, "ordering needs at least 3 distinct colors");
  }
  const auto norm = normalized(pts);
  Eigen::MatrixXd dist(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) dist(i, j) = delta_norm(norm[i], norm[j]);
  }

  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(cfg.knn_k), n - 1);
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> edge =
      Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(n, n, false);
  double knn_sum = 0.0;
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < n; ++i) {
    idx.resize(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::erase(idx, i);
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                      [&](std::size_t x, std::size_t y) {
                        return dist(i, x) < dist(i, y) || (dist(i, x) == dist(i, y) && x < y);
                      });
    for (std::size_t r = 0; r < k; ++r) {
      edge(i, idx[r]) = edge(idx[r], i) = true;
      knn_sum += dist(i, idx[r]);
    }
  }
  const double sigma = knn_sum / static_cast<double>(n * k);

  // Join disconnected components through their closest cross pairs. A bridge spans a gap
  // far wider than sigma, so it gets the affinity of a typical neighbor instead of an
  // underflowed Gaussian.
  std::vector<std::pair<std::size_t, std::size_t>> bridge;
  DisjointSet ds(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (edge(i, j)) ds.unite(i, j);
    }
  }
  std::size_t components = 0;
  for (std::size_t i = 0; i < n; ++i) components += ds.find(i) == i ? 1 : 0;
  if (components > 1) {
    std::vector<std::tuple<double, std::size_t, std::size_t>> cross;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (ds.find(i) != ds.find(j)) cross.emplace_back(dist(i, j), i, j);
      }
    }
    std::sort(cross.begin(), cross.end());
    for (const auto& [d, i, j] : cross) {
      if (ds.unite(i, j)) {
        bridge.emplace_back(i, j);
        if (--components == 1) break;
      }
    }
  }

  // Floor keeps far k-NN edges from underflowing into a numerically disconnected graph.
  constexpr double kMinAffinity = 1e-6;
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
  const double denom = 2.0 * sigma * sigma;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || !edge(i, j)) continue;
      const double w = std::max(std::exp(-dist(i, j) * dist(i, j) / denom), kMinAffinity);
      lap(i, j) = -w;
      lap(i, i) += w;
    }
  }
  const double bridge_w = std::exp(-0.5);
  for (const auto& [i, j] : bridge) {
    lap(i, j) = lap(j, i) = -bridge_w;
    lap(i, i) += bridge_w;
    lap(j, j) += bridge_w;
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::insufficient_points, "eigen decomposition failed");
  }
  const Eigen::VectorXd fiedler = solver.eigenvectors().col(1);

  idx.resize(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return fiedler(x) < fiedler(y); });

  std::vector<LabColor> line;
  line.reserve(n);
  for (std::size_t i : idx) line.push_back(pts[i].color);
  if (canonical_less(line.back(), line.front())) std::reverse(line.begin(), line.end());

  std::vector<double> arc(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) arc[i] = arc[i - 1] + distance(line[i - 1], line[i]);
  std::vector<LabColor> out(kContinuousSize);
  std::size_t seg = 0;
  for (std::size_t s = 0; s < kContinuousSize; ++s) {
    const double target = arc.back() * static_cast<double>(s) / static_cast<double>(kContinuousSize - 1);
    while (seg + 2 < n && arc[seg + 1] < target) ++seg;
    const double len = arc[seg + 1] - arc[seg];
    const double f = len > 0.0 ? std::clamp((target - arc[seg]) / len, 0.0, 1.0) : 0.0;
    const LabColor& p = line[seg];
    const LabColor& q = line[seg + 1];
    out[s] = {p.L + f * (q.L - p.L), p.a + f * (q.a - p.a), p.b + f * (q.b - p.b)};
  }
  out.front() = line.front();
  out.back() = line.back();
  return out;
}

std::vector<LabColor> recover_order(std::span<const LabColor> colors, const ColormapImage& pred) {
  if (colors.size() <= 1) return {colors.begin(), colors.end()};
  std::vector<NormLab> targets;
  for (const auto& c : colors) targets.push_back(normalize_lab(c));
  std::vector<double> col_sum(colors.size(), 0.0);
  std::vector<std::size_t> count(colors.size(), 0);
  for (int r = 0; r < ColormapImage::kRows; ++r) {
    for (int c = 0; c < ColormapImage::kCols; ++c) {
      const NormLab px = normalize_lab(srgb_to_lab(pred.at(r, c)));
      std::size_t best = 0;
      double best_d = delta_norm(px, targets[0]);
      for (std::size_t i = 1; i < targets.size(); ++i) {
        const double d = delta_norm(px, targets[i]);
        if (d < best_d) {
          best_d = d;
          best = i;
        }
      }
      col_sum[best] += c;
      ++count[best];
    }
  }
  std::vector<std::size_t> order(colors.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if ((count[x] == 0) != (count[y] == 0)) return count[y] == 0;
    if (count[x] == 0) return false;
    return col_sum[x] / static_cast<double>(count[x]) < col_sum[y] / static_cast<double>(count[y]);
  });
  std::vector<LabColor> out;
  out.reserve(colors.size());
  for (std::size_t i : order) out.push_back(colors[i]);
  return out;
}

Colormap refine(const ColormapImage& pred, const RefineConfig& cfg) {
  const auto bins = prediction_bins(pred, cfg);
  Colormap out;
  if (kind_of(pred, bins, cfg) == ColormapKind::discrete) {
    auto clusters = dbscan_colors(bins, cfg);
    if (clusters.size() > kMaxDiscreteSize) {
      std::stable_sort(clusters.begin(), clusters.end(),
                       [](const auto& x, const auto& y) { return x.weight > y.weight; });
      clusters.resize(kMaxDiscreteSize);
    }
    std::vector<LabColor> colors;
    for (const auto& c : clusters) colors.push_back(c.prominent);
    out.kind = ColormapKind::discrete;
    out.colors = recover_order(colors, pred);
  } else {
    out.kind = ColormapKind::continuous;
    out.colors = laplacian_order(bins, cfg);
    const std::vector<LabColor> ends{out.colors.front(), out.colors.back()};
    if (recover_order(ends, pred).front() != ends.front()) {
      std::reverse(out.colors.begin(), out.colors.end());
    }
  }
  out.validate();
  return out;
}

}  // namespace chromex
