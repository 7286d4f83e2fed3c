#pragma once

// Reader for the small TOML subset used by experiment configs: [tables]
// and [dotted.tables], key = value with strings, numbers, booleans and
// (nested, possibly multi-line) arrays, and # comments.

#include <string>

#include "mlpcm/serialize.hpp"

namespace mlpcm {

Json parse_toml(const std::string& text);
Json read_toml_file(const std::string& path);

}  // namespace mlpcm
