#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace ttx {

// Wall-clock instant with microsecond resolution, UTC.
using Timestamp = std::chrono::sys_time<std::chrono::microseconds>;
using Duration = std::chrono::microseconds;

constexpr Duration Minutes(std::int64_t minutes) {
  return std::chrono::duration_cast<Duration>(std::chrono::minutes(minutes));
}

// `YYYY-MM-DDTHH:MM:SS.ssssssZ`, always six fractional digits.
std::string FormatTimestamp(Timestamp ts);

// Strict inverse of FormatTimestamp. Returns nullopt on any deviation from the
// exact format (missing fraction, wrong digit count, no trailing Z, ...).
std::optional<Timestamp> ParseTimestamp(std::string_view text);

// Fractional minutes between two instants.
double MinutesBetween(Timestamp from, Timestamp to);

}  // namespace ttx
