#include <algorithm>
#include <limits>

#include "chromex/error.hpp"
#include "chromex/eval.hpp"

namespace chromex {

DtwResult dtw_distance(std::span<const LabColor> gt, std::span<const LabColor> out) {
  if (gt.empty() || out.empty()) throw Error(ErrorCode::empty_input, "DTW needs non-empty colormaps");
  const std::size_t m = gt.size();
  const std::size_t n = out.size();
  std::vector<NormLab> a;
  std::vector<NormLab> b;
  for (const auto& c : gt) a.push_back(normalize_lab(c));
  for (const auto& c : out) b.push_back(normalize_lab(c));

  // cost and coupling length of the best path ending at (i, j); ties prefer fewer steps.
  struct Cell {
    double cost;
    int len;
  };
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<Cell> dp(m * n, {kInf, 0});
  const auto at = [&](std::size_t i, std::size_t j) -> Cell& { return dp[i * n + j]; };
  const auto better = [](const Cell& x, const Cell& y) {
    return x.cost < y.cost || (x.cost == y.cost && x.len < y.len);
  };
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double d = delta_norm(a[i], b[j]);
      if (i == 0 && j == 0) {
        at(i, j) = {d, 1};
        continue;
      }
      Cell best{kInf, 0};
      if (i > 0 && j > 0) best = at(i - 1, j - 1);
      if (i > 0 && better(at(i - 1, j), best)) best = at(i - 1, j);
      if (j > 0 && better(at(i, j - 1), best)) best = at(i, j - 1);
      at(i, j) = {best.cost + d, best.len + 1};
    }
  }

  DtwResult r;
  r.raw = at(m - 1, n - 1).cost;
  r.normalized = r.raw / at(m - 1, n - 1).len;
  std::size_t i = m - 1;
  std::size_t j = n - 1;
  r.coupling.emplace_back(static_cast<int>(i), static_cast<int>(j));
  while (i > 0 || j > 0) {
    // Same preference order as the forward pass: diagonal, then vertical, then horizontal.
    std::size_t bi = i;
    std::size_t bj = j;
    Cell best{kInf, 0};
    if (i > 0 && j > 0) {
      best = at(i - 1, j - 1);
      bi = i - 1;
      bj = j - 1;
    }
    if (i > 0 && better(at(i - 1, j), best)) {
      best = at(i - 1, j);
      bi = i - 1;
      bj = j;
    }
    if (j > 0 && better(at(i, j - 1), best)) {
      bi = i;
      bj = j - 1;
    }
    i = bi;
    j = bj;
    r.coupling.emplace_back(static_cast<int>(i), static_cast<int>(j));
  }
  std::reverse(r.coupling.begin(), r.coupling.end());
  return r;
}

DtwResult dtw_distance(const Colormap& gt, const Colormap& out) {
  return dtw_distance(std::span<const LabColor>(gt.colors), std::span<const LabColor>(out.colors));
}

DtwResult dtw_oriented(const Colormap& gt, const Colormap& out) {
  DtwResult forward = dtw_distance(gt, out);
  std::vector<LabColor> rev(out.colors.rbegin(), out.colors.rend());
  DtwResult backward = dtw_distance(gt.colors, rev);
  return backward.raw < forward.raw ? backward : forward;
}

}  // namespace chromex
