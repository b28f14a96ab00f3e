#pragma once

#include <filesystem>
#include <string>

namespace pomaudit {

std::string read_text_file(const std::filesystem::path& path);

// Creates parent directories and writes via a temp file + rename so readers
// never observe a partial file.
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace pomaudit
