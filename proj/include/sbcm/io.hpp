#pragma once

#include "sbcm/core.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace sbcm {

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

/// Strict parse of a whole token; throws ValidationError on trailing junk.
double parse_double(std::string_view text);
long long parse_integer(std::string_view text);

std::vector<std::string_view> split_whitespace(std::string_view line);
std::vector<std::string> split_csv_line(const std::string& line);

std::string read_file(const std::filesystem::path& path);
/// Writes via a temporary sibling file and rename.
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace sbcm
