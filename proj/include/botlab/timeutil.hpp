#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace botlab {

/// Seconds since the Unix epoch, UTC.
struct Timestamp {
  std::int64_t seconds = 0;

  auto operator<=>(const Timestamp&) const = default;
};

inline constexpr std::int64_t kSecondsPerDay = 86400;

/// Parses an RFC 3339 timestamp. Accepts `Z` or a numeric offset
/// (`+00:00`, `-05:00`, ...); fractional seconds are truncated.
/// Throws ValidationError on malformed input.
Timestamp parse_timestamp(std::string_view text);

/// Formats as `YYYY-MM-DDTHH:MM:SSZ`.
std::string format_timestamp(Timestamp t);

Timestamp from_civil(int year, unsigned month, unsigned day,
                     unsigned hour = 0, unsigned minute = 0,
                     unsigned second = 0);

/// Start of the UTC calendar day containing t.
Timestamp utc_day_start(Timestamp t);

/// Hour of day in [0, 24).
int utc_hour(Timestamp t);

}  // namespace botlab
