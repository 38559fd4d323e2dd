#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace flarecast {

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

/// Full-string parse of a decimal or scientific double; surrounding blanks allowed.
std::optional<double> parse_double(std::string_view text);

std::vector<std::string_view> split(std::string_view line, char delimiter);

std::string_view trim(std::string_view s);

} // namespace flarecast
