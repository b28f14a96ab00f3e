#pragma once

#include <string>
#include <vector>

namespace pomaudit {

// Command-line entry point. Exit codes: 0 success, 1 usage error, 2 pipeline
// error. Flags override configuration-file values, which override defaults.
int dispatch(int argc, const char* const* argv);
int dispatch(const std::vector<std::string>& args);  // without the program name

}  // namespace pomaudit
