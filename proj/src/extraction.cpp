#include "pomaudit/extraction.hpp"

#include <cctype>
#include <string_view>

namespace pomaudit {

namespace {

constexpr size_t npos = std::string_view::npos;

// End index of the balanced region opening at `begin` (text[begin] is '{' or
// '['), scanning no further than `limit`. Tracks JSON string literals so
// brackets inside strings do not count. npos when unbalanced or mismatched.
size_t find_balanced_end(std::string_view text, size_t begin, size_t limit) {
  std::string stack;
  bool in_string = false;
  for (size_t i = begin; i < limit; ++i) {
    char c = text[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    switch (c) {
      case '"': in_string = true; break;
      case '{': stack.push_back('}'); break;
      case '[': stack.push_back(']'); break;
      case '}':
      case ']':
        if (stack.empty() || stack.back() != c) return npos;
        stack.pop_back();
        if (stack.empty()) return i;
        break;
      default: break;
    }
  }
  return npos;
}

void collect_range(std::string_view text, size_t begin, size_t end, Extraction& out) {
  size_t i = begin;
  while (i < end) {
    char c = text[i];
    if (c == '{' || c == '[') {
      size_t close = find_balanced_end(text, i, end);
      if (close != npos) {
        ++out.candidates;
        auto parsed = nlohmann::json::parse(text.substr(i, close - i + 1),
                                            /*cb=*/nullptr, /*allow_exceptions=*/false);
        if (!parsed.is_discarded()) {
          out.values.push_back(std::move(parsed));
        } else {
          collect_range(text, i + 1, close, out);
        }
        i = close + 1;
        continue;
      }
    }
    ++i;
  }
}

}  // namespace

std::string strip_code_fences(const std::string& raw) {
  std::string out;
  out.reserve(raw.size());
  size_t i = 0;
  while (i < raw.size()) {
    if (raw.compare(i, 3, "```") == 0) {
      i += 3;
      // Swallow a language tag glued to the opening fence.
      while (i < raw.size() &&
             (std::isalnum(static_cast<unsigned char>(raw[i])) || raw[i] == '+' || raw[i] == '-' ||
              raw[i] == '_')) {
        ++i;
      }
      continue;
    }
    out.push_back(raw[i]);
    ++i;
  }
  return out;
}

Extraction extract_structured(const std::string& raw) {
  Extraction out;
  const std::string stripped = strip_code_fences(raw);
  collect_range(stripped, 0, stripped.size(), out);
  return out;
}

}  // namespace pomaudit
