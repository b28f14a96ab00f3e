#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace pomaudit {

// Candidate extraction from raw model text. Fenced code blocks are stripped to
// their contents first, then every outermost bracket-balanced {...} or [...]
// region is taken as a candidate. Candidates that fail to parse as JSON have
// their interior rescanned so a balanced-but-unparseable wrapper cannot hide a
// valid payload.
struct Extraction {
  std::vector<nlohmann::json> values;  // successfully parsed candidates, in text order
  int candidates = 0;                  // balanced regions found, parsed or not
};

Extraction extract_structured(const std::string& raw);

// Removes ``` fence markers (plus an attached language tag) while keeping the
// fenced contents in place.
std::string strip_code_fences(const std::string& raw);

}  // namespace pomaudit
