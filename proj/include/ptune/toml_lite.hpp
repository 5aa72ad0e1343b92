#pragma once

// Small TOML reader covering the subset config files use: [section.sub]
// headers, key = value pairs with string/integer/float/boolean/array values,
// and # comments. Parsed into a json tree so both config formats share one
// loading path.

#include <string>

#include <json.hpp>

namespace ptune::toml_lite {

nlohmann::json parse(const std::string& text);

}  // namespace ptune::toml_lite
