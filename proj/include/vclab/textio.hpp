#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace vclab {

// Shortest round-trip decimal form, locale-independent.
std::string fmt_double(double v);

uint64_t fnv1a64(const std::string& text);

std::vector<std::string> split(const std::string& text, char sep);
std::string trim(const std::string& text);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace vclab
