#pragma once

#include <json.hpp>

#include "chromex/color.hpp"

namespace chromex::internal {

nlohmann::json colormap_to_json_value(const Colormap& cmap);
Colormap colormap_from_json_value(const nlohmann::json& j);

}  // namespace chromex::internal
