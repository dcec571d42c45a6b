#pragma once

#include <string>

#include <json.hpp>

namespace sf {

// Shortest-free fixed format: every double with 17 significant digits, NaN and infinities as null.
std::string fmt17(double v);
std::string dump17(const nlohmann::json& j, int indent = 2);

}  // namespace sf
