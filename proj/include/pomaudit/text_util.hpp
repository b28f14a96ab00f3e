#pragma once

#include <string>
#include <string_view>

namespace pomaudit {

std::string trim(std::string_view text);
std::string to_lower(std::string_view text);

// ceil(character count / chars_per_token); the provider-independent token estimate.
long long estimate_tokens(std::string_view text, double chars_per_token = 4.0);

// Minimal glob matcher for exclusion patterns over '/'-separated relative paths.
// '*' and '?' match within a path segment; '**' crosses segments and may match
// zero of them, so "**/test/**" also excludes a top-level test/ directory.
bool glob_match(std::string_view pattern, std::string_view path);

// Fixed-point rendering with the given number of decimals (locale-independent).
std::string format_real(double value, int decimals);

}  // namespace pomaudit
