#pragma once

#include <string>

namespace hexplain {

std::string ReadFile(const std::string& path);

// Writes to a sibling temporary file and renames it over `path`.
void WriteFileAtomic(const std::string& path, const std::string& contents);

}  // namespace hexplain
