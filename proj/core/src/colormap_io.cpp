#include "chromex/colormap_io.hpp"

#include <json.hpp>
#include <unordered_set>

#include "chromex/error.hpp"
#include "internal/files.hpp"
#include "internal/json_colormap.hpp"

namespace chromex::internal {
extern const char* const kColormapBundle;
}

namespace chromex {

using nlohmann::json;

namespace internal {

json colormap_to_json_value(const Colormap& cmap) {
  json colors = json::array();
  json hex = json::array();
  for (const auto& c : cmap.colors) {
    colors.push_back({c.L, c.a, c.b});
    hex.push_back(to_hex(lab_to_srgb(c)));
  }
  return json{{"name", cmap.name},
              {"kind", std::string(kind_name(cmap.kind))},
              {"colors", std::move(colors)},
              {"colors_hex", std::move(hex)}};
}

Colormap colormap_from_json_value(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::invalid_argument, "colormap JSON must be an object");
  Colormap cmap;
  try {
    cmap.name = j.value("name", std::string{});
    cmap.kind = parse_kind(j.at("kind").get<std::string>());
    if (j.contains("colors")) {
      for (const auto& c : j.at("colors")) {
        if (!c.is_array() || c.size() != 3) {
          throw Error(ErrorCode::invalid_argument, "colors entries must be [L,a,b]");
        }
        cmap.colors.push_back({c[0].get<double>(), c[1].get<double>(), c[2].get<double>()});
      }
    } else if (j.contains("colors_hex")) {
      for (const auto& h : j.at("colors_hex")) {
        cmap.colors.push_back(srgb_to_lab(parse_hex(h.get<std::string>())));
      }
    } else {
      throw Error(ErrorCode::invalid_argument, "colormap JSON needs 'colors' or 'colors_hex'");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::invalid_argument, std::string("malformed colormap JSON: ") + e.what());
  }
  cmap.validate();
  return cmap;
}

}  // namespace internal

std::string colormap_to_json(const Colormap& cmap, int indent) {
  return internal::colormap_to_json_value(cmap).dump(indent);
}

Colormap colormap_from_json(std::string_view text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::invalid_argument, "colormap JSON does not parse");
  return internal::colormap_from_json_value(j);
}

Colormap read_colormap_file(const std::filesystem::path& path) {
  return colormap_from_json(internal::read_text_file(path));
}

void write_colormap_file(const std::filesystem::path& path, const Colormap& cmap) {
  internal::write_text_file(path, colormap_to_json(cmap, 1) + "\n");
}

std::vector<Colormap> parse_colormap_library(std::string_view text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("colormaps") ||
      !j["colormaps"].is_array()) {
    throw Error(ErrorCode::corrupt, "colormap bundle is not a valid library document");
  }
  std::vector<Colormap> maps;
  std::unordered_set<std::string> names;
  for (const auto& entry : j["colormaps"]) {
    Colormap cmap;
    try {
      cmap = internal::colormap_from_json_value(entry);
    } catch (const Error& e) {
      throw Error(ErrorCode::corrupt, std::string("colormap bundle entry rejected: ") + e.what());
    }
    if (cmap.name.empty()) throw Error(ErrorCode::corrupt, "colormap bundle entry without a name");
    if (cmap.kind == ColormapKind::discrete && cmap.size() < 3) {
      throw Error(ErrorCode::corrupt, "bundled discrete colormap '" + cmap.name +
                                          "' has fewer than three colors");
    }
    if (!names.insert(cmap.name).second) {
      throw Error(ErrorCode::corrupt, "duplicate colormap name '" + cmap.name + "'");
    }
    maps.push_back(std::move(cmap));
  }
  return maps;
}

std::vector<Colormap> load_colormap_library(const std::filesystem::path& bundle) {
  return parse_colormap_library(internal::read_text_file(bundle));
}

const std::vector<Colormap>& load_colormap_library() {
  static const std::vector<Colormap> library = parse_colormap_library(internal::kColormapBundle);
  return library;
}

const Colormap& find_colormap(std::string_view name) {
  for (const auto& cmap : load_colormap_library()) {
    if (cmap.name == name) return cmap;
  }
  throw Error(ErrorCode::not_found, "unknown colormap '" + std::string(name) + "'");
}

}  // namespace chromex
