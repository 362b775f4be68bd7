#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

namespace pdsde::tomlite {

// Parses the TOML subset used by scenario files into a JSON object of
// single-level tables:
//
//   # comment
//   [table]
//   key = 1.5            # numbers (integers keep integer type)
//   key = "text"         # basic strings with \" \\ \n \t escapes
//   key = true           # booleans
//   key = [1, 2, [3]]    # arrays, possibly nested and spanning lines
//
// Keys outside a table, dotted keys, duplicate keys/tables and inline tables
// are rejected. Errors throw ConfigError keyed "line N" (1-based).
nlohmann::json parse(std::string_view text);

}  // namespace pdsde::tomlite
