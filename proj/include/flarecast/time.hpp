#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace flarecast {

using Instant = std::chrono::sys_seconds;
using Day = std::chrono::sys_days;

/// Parses "YYYY-MM-DDTHH:MM[:SS][Z]" (a space may replace 'T'). Fractional
/// seconds are truncated. Returns nullopt on malformed input.
std::optional<Instant> parse_iso8601(std::string_view text);

/// Formats as "YYYY-MM-DDTHH:MM:SSZ".
std::string format_iso8601(Instant t);

/// Formats as "YYYY-MM-DD".
std::string format_date(Day d);

inline Day day_of(Instant t) { return std::chrono::floor<std::chrono::days>(t); }

} // namespace flarecast
