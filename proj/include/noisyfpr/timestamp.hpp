#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

namespace noisyfpr {

/// Parses an integer epoch-milliseconds value or an RFC 3339 datetime
/// ("2019-01-01T00:00:18Z", "2019-01-01 00:00:18", fractional seconds and
/// numeric offsets allowed; no offset means UTC). Returns nullopt on failure.
std::optional<std::int64_t> parse_timestamp_ms(std::string_view text);

}  // namespace noisyfpr
