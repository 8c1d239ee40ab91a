#pragma once

#include <string>
#include <string_view>

#include "json.hpp"

namespace stablefield::cli {

using Json = nlohmann::ordered_json;

/// Parses the experiment config grammar (see docs/config.md) into a JSON
/// object. Throws config_error with "source:line: message".
Json parse_config(std::string_view text, const std::string& source = "<config>");
Json load_config(const std::string& path);

/// Writes a config back in the same grammar; parse_config(emit_config(c)) == c.
std::string emit_config(const Json& config);

}  // namespace stablefield::cli
