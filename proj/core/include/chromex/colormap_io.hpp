#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "chromex/color.hpp"

namespace chromex {

/// Serializes as {"name", "kind", "colors": [[L,a,b],...], "colors_hex": [...]}.
std::string colormap_to_json(const Colormap& cmap, int indent = -1);

/// Accepts either "colors" ([[L,a,b],...]) or "colors_hex" (["#RRGGBB",...]).
Colormap colormap_from_json(std::string_view text);

Colormap read_colormap_file(const std::filesystem::path& path);
void write_colormap_file(const std::filesystem::path& path, const Colormap& cmap);

/// The colormap set compiled into the library.
const std::vector<Colormap>& load_colormap_library();

/// Parses a library bundle file ({"version": 1, "colormaps": [...]}).
/// Throws Error(corrupt) when the bundle is malformed or violates the size rules.
std::vector<Colormap> load_colormap_library(const std::filesystem::path& bundle);
std::vector<Colormap> parse_colormap_library(std::string_view text);

/// Throws Error(not_found) for unknown names.
const Colormap& find_colormap(std::string_view name);

}  // namespace chromex
