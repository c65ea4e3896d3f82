#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nxplay {

// Shortest decimal form that parses back to the identical double.
std::string format_double(double v);
std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

std::vector<std::string_view> split(std::string_view s, char sep);
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);
std::string hex64(unsigned long long v);

}  // namespace nxplay
