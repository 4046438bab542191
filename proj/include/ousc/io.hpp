#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace ousc {

// Round-trip formatting: %.17g, with inf/-inf/nan spelled out.
std::string num(double v);
double parse_num(const std::string& s);

// Split one CSV line (no quoting; the artifacts never need it).
std::vector<std::string> split_csv(const std::string& line);

// Write through a temporary file in the same directory and rename into place.
void write_atomic(const std::filesystem::path& path, const std::string& content);
void write_atomic(const std::filesystem::path& path,
                  const std::function<void(std::ostream&)>& writer);

std::string read_file(const std::filesystem::path& path);

}  // namespace ousc
