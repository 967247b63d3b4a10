#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace hexplain::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kDataError = 2;
inline constexpr int kInternalError = 3;

// Runs one command line (args excludes the program name). Results go to
// `out`, diagnostics to `err`.
int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hexplain::cli
