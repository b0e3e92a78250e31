#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace natforest {

// Parses "YYYY-MM-DDTHH:MM:SS[.fff]Z" (UTC) to epoch seconds, fractional part
// discarded. Returns nullopt on malformed input.
std::optional<int64_t> parse_iso8601(std::string_view s);

// Formats epoch seconds as "YYYY-MM-DDTHH:MM:SSZ" (the canonical archive form).
std::string format_iso8601(int64_t epoch_seconds);

} // namespace natforest
