#pragma once

#include <string>
#include <string_view>

namespace pomaudit {

// Lowercase 64-hex-char SHA-256 digest of the input bytes.
std::string sha256_hex(std::string_view data);

}  // namespace pomaudit
