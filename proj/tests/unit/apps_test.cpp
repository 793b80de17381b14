#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "chromex/apps.hpp"
#include "chromex/baselines.hpp"
#include "chromex/chartgen.hpp"
#include "chromex/colormap_io.hpp"
#include "chromex/error.hpp"
#include "chromex/histogram.hpp"

namespace chromex {
namespace {

RgbImage render_flat(const std::string& cmap, ChartType type, int categories, std::uint64_t seed) {
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

/// Exact colors of flat renders: few distinct colors come back verbatim, sorted by L.
Colormap exact_colors(const RgbImage& img) { return palette_extract(img, 10); }

std::uint32_t pack(Rgb8 c) { return (std::uint32_t{c.r} << 16) | (std::uint32_t{c.g} << 8) | c.b; }

std::set<std::uint32_t> foreground_set(const RgbImage& img) {
  const ForegroundMask mask(img);
  std::set<std::uint32_t> out;
  for (const Rgb8 px : img.pixels()) {
    if (mask.keep(px)) out.insert(pack(px));
  }
  return out;
}

// --- transfer -----------------------------------------------------------------------

TEST(Transfer, SameColormapIsIdentity) {
  const RgbImage img = render_flat("Dark2_4", ChartType::grouped_bar, 4, 1);
  EXPECT_EQ(transfer(img, img, exact_colors), img);
}

TEST(Transfer, ThreeColorPieTakesFirstThreeReferenceColors) {
  const RgbImage target = render_flat("Set1_3", ChartType::pie, 3, 2);
  const RgbImage reference = render_flat("tab10_5", ChartType::pie, 5, 3);
  const Colormap ref = exact_colors(reference);
  ASSERT_EQ(ref.size(), 5u);
  const RgbImage out = transfer(reference, target, exact_colors);
  std::set<std::uint32_t> expected;
  for (std::size_t j = 0; j < 3; ++j) expected.insert(pack(lab_to_srgb(ref.colors[j])));
  EXPECT_EQ(foreground_set(out), expected);
  // Background and geometry are untouched.
  for (int y = 0; y < target.height(); ++y) {
    for (int x = 0; x < target.width(); ++x) {
      if (target.at(x, y) == Rgb8{255, 255, 255}) ASSERT_EQ(out.at(x, y), target.at(x, y));
    }
  }
}

TEST(Transfer, MoreTargetColorsThanReferenceFails) {
  const RgbImage target = render_flat("Set2_6", ChartType::pie, 6, 2);
  const RgbImage reference = render_flat("tab10_5", ChartType::pie, 5, 3);
  try {
    transfer(reference, target, exact_colors);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_argument);
  }
}

TEST(Transfer, Idempotent) {
  const RgbImage reference = render_flat("Paired_7", ChartType::stacked_bar, 7, 5);
  for (const char* name : {"Set1_3", "Dark2_4", "tab10_5"}) {
    const RgbImage target = render_flat(name, ChartType::grouped_bar, static_cast<int>(find_colormap(name).size()), 6);
    const RgbImage once = transfer(reference, target, exact_colors);
    EXPECT_EQ(transfer(reference, once, exact_colors), once) << name;
  }
}

TEST(Transfer, ContinuousMapsAreRejected) {
  const RgbImage img = render_flat("Set1_3", ChartType::pie, 3, 1);
  try {
    transfer(img, find_colormap("viridis"), find_colormap("Set1_3"));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kind_mismatch);
  }
}

// --- remap -----------------------------------------------------------------------------

TEST(Remap, HalfIsExactIdentity) {
  for (const Colormap& c : load_colormap_library()) {
    if (!c.is_continuous()) continue;
    EXPECT_EQ(remap(c, 0.5).colors, c.colors) << c.name;
  }
}

TEST(Remap, QuarterUsesSquareRootWarp) {
  const Colormap& c = find_colormap("viridis");
  EXPECT_DOUBLE_EQ(remap_gamma(0.25), 0.5);
  const Colormap out = remap(c, 0.25);
  ASSERT_EQ(out.size(), 256u);
  for (const int i : {1, 64, 128, 200, 254}) {
    const LabColor want = sample(c, std::sqrt(i / 255.0));
    EXPECT_NEAR(out.colors[static_cast<std::size_t>(i)].L, want.L, 1e-12);
    EXPECT_NEAR(out.colors[static_cast<std::size_t>(i)].a, want.a, 1e-12);
    EXPECT_NEAR(out.colors[static_cast<std::size_t>(i)].b, want.b, 1e-12);
  }
  // The color at t = 0.5 of the output is the input's color at sqrt(0.5).
  const LabColor mid = sample(out, 0.5);
  EXPECT_LE(delta_norm(mid, sample(c, std::sqrt(0.5))), 0.01);
}

TEST(Remap, EndpointsAndComposition) {
  const Colormap& c = find_colormap("Spectral");
  for (const double p : {0.01, 0.2, 0.5, 0.8, 0.99}) {
    const Colormap out = remap(c, p);
    EXPECT_EQ(out.colors.front(), c.colors.front());
    EXPECT_EQ(out.colors.back(), c.colors.back());
    EXPECT_EQ(remap(out, 0.5).colors, out.colors);
  }
}

TEST(Remap, ClampsAndRejects) {
  const Colormap& c = find_colormap("plasma");
  EXPECT_EQ(remap(c, 0.0).colors, remap(c, 0.01).colors);
  EXPECT_EQ(remap(c, 1.5).colors, remap(c, 0.99).colors);
  EXPECT_THROW(remap(c, std::nan("")), Error);
  try {
    remap(find_colormap("Set1_3"), 0.3);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kind_mismatch);
  }
}

TEST(Remap, LeftDragBrightensLowEndOfLightnessRamp) {
  // p < 0.5 gives gamma < 1, so each position samples further along the ramp.
  const Colormap& c = find_colormap("grays");
  const Colormap out = remap(c, 0.3);
  for (std::size_t i = 1; i + 1 < out.size(); ++i) {
    EXPECT_GE(out.colors[i].L + 1e-9, c.colors[i].L);
  }
}

// --- recolor_image ----------------------------------------------------------------------

TEST(Recolor, SameMapLeavesImageUnchanged) {
  ChartStyle style;
  style.type = ChartType::heatmap;
  DataSpec spec;
  spec.kind = Distribution::uniform;
  spec.n_points = 32;
  spec.n_categories = 16;
  spec.seed = 3;
  const RgbImage img = render_chart(style, sample_data(spec), find_colormap("viridis"));
  const RgbImage out = recolor_image(img, find_colormap("viridis"), find_colormap("viridis"));
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const Rgb8 a = img.at(x, y);
      const Rgb8 b = out.at(x, y);
      ASSERT_LE(std::abs(a.r - b.r), 1);
      ASSERT_LE(std::abs(a.g - b.g), 1);
      ASSERT_LE(std::abs(a.b - b.b), 1);
    }
  }
}

TEST(Recolor, DualRenderOracle) {
  const std::pair<const char*, const char*> pairs[] = {{"viridis", "plasma"}, {"YlGnBu", "RdBu"}, {"cividis", "inferno"}};
  for (const auto& [from, to] : pairs) {
    const RgbImage a = render_flat(from, ChartType::heatmap, 16, 9);
    const RgbImage b = render_flat(to, ChartType::heatmap, 16, 9);
    const RgbImage out = recolor_image(a, find_colormap(from), find_colormap(to));
    const Rgb8 bg = a.at(0, 0);
    double worst = 0.0;
    for (int y = 0; y < a.height(); ++y) {
      for (int x = 0; x < a.width(); ++x) {
        if (a.at(x, y) == bg) {
          ASSERT_EQ(out.at(x, y), bg);
          continue;
        }
        worst = std::max(worst, delta_norm(srgb_to_lab(out.at(x, y)), srgb_to_lab(b.at(x, y))));
      }
    }
    EXPECT_LE(worst, 0.03) << from << " -> " << to;
  }
}

TEST(Recolor, DiscreteSubstitution) {
  const RgbImage img = render_flat("Set1_3", ChartType::pie, 3, 4);
  const Colormap old_map = exact_colors(img);
  const Colormap new_map = find_colormap("Dark2_4");
  const RgbImage out = recolor_image(img, old_map, new_map);
  std::set<std::uint32_t> expected;
  for (std::size_t j = 0; j < 3; ++j) expected.insert(pack(lab_to_srgb(new_map.colors[j])));
  EXPECT_EQ(foreground_set(out), expected);
}

TEST(Recolor, KindMismatch) {
  const RgbImage img = render_flat("Set1_3", ChartType::pie, 3, 4);
  try {
    recolor_image(img, find_colormap("Set1_3"), find_colormap("viridis"));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kind_mismatch);
  }
}

}  // namespace
}  // namespace chromex
