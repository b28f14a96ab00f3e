#include "pomaudit/text_util.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>

namespace pomaudit {

std::string trim(std::string_view text) {
  size_t begin = 0;
  size_t end = text.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
  return std::string(text.substr(begin, end - begin));
}

std::string to_lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

long long estimate_tokens(std::string_view text, double chars_per_token) {
  if (text.empty()) return 0;
  if (chars_per_token <= 0) chars_per_token = 4.0;
  return static_cast<long long>(
      std::ceil(static_cast<double>(text.size()) / chars_per_token));
}

namespace {

bool match_from(std::string_view pattern, std::string_view path) {
  if (pattern.empty()) return path.empty();

  if (pattern.substr(0, 2) == "**") {
    std::string_view rest = pattern.substr(2);
    if (!rest.empty() && rest.front() == '/') rest.remove_prefix(1);
    if (rest.empty()) return true;  // trailing '**' matches any remainder
    // '**' may consume zero segments or any prefix ending at a segment boundary.
    if (match_from(rest, path)) return true;
    for (size_t i = 0; i < path.size(); ++i) {
      if (path[i] == '/' && match_from(rest, path.substr(i + 1))) return true;
    }
    return false;
  }

  char pc = pattern.front();
  if (pc == '*') {
    // Within a segment only.
    if (match_from(pattern.substr(1), path)) return true;
    for (size_t i = 0; i < path.size() && path[i] != '/'; ++i) {
      if (match_from(pattern.substr(1), path.substr(i + 1))) return true;
    }
    return false;
  }
  if (path.empty()) return false;
  if (pc == '?') return path.front() != '/' && match_from(pattern.substr(1), path.substr(1));
  return pc == path.front() && match_from(pattern.substr(1), path.substr(1));
}

}  // namespace

bool glob_match(std::string_view pattern, std::string_view path) {
  return match_from(pattern, path);
}

std::string format_real(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  std::string out(buf);
  if (out == "-0" || out.rfind("-0.", 0) == 0) {
    bool all_zero = true;
    for (char c : out) {
      if (c != '-' && c != '0' && c != '.') { all_zero = false; break; }
    }
    if (all_zero) out.erase(0, 1);
  }
  return out;
}

}  // namespace pomaudit
