#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace stopcast {

/// Base exception for every recoverable failure in the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A naive plant-local instant, stored as milliseconds since 1970-01-01 00:00:00.
/// No time zone or DST handling is applied.
struct Timestamp {
    std::int64_t ms = 0;

    constexpr auto operator<=>(const Timestamp&) const = default;

    constexpr Timestamp plus_ms(std::int64_t delta) const { return {ms + delta}; }
    constexpr Timestamp plus_seconds(std::int64_t s) const { return {ms + s * 1000}; }
};

constexpr std::int64_t kMsPerSecond = 1000;
constexpr std::int64_t kMsPerMinute = 60 * kMsPerSecond;
constexpr std::int64_t kMsPerHour = 60 * kMsPerMinute;
constexpr std::int64_t kMsPerDay = 24 * kMsPerHour;

/// Seconds between two instants (b - a).
inline double seconds_between(Timestamp a, Timestamp b) {
    return static_cast<double>(b.ms - a.ms) / 1000.0;
}

struct CivilTime {
    int year = 1970;
    int month = 1;   // 1..12
    int day = 1;     // 1..31
    int hour = 0;
    int minute = 0;
    int second = 0;
    int millisecond = 0;
};

Timestamp make_timestamp(int year, int month, int day, int hour = 0, int minute = 0,
                         int second = 0, int millisecond = 0);
CivilTime to_civil(Timestamp t);

/// Monday = 0 .. Sunday = 6.
int weekday(Timestamp t);
/// ISO-8601 week number (1..53).
int iso_week(Timestamp t);
/// 1-based day of the year.
int day_of_year(Timestamp t);

Timestamp floor_to(Timestamp t, std::int64_t width_ms);
Timestamp start_of_day(Timestamp t);
/// Milliseconds elapsed since local midnight.
std::int64_t time_of_day_ms(Timestamp t);

/// Parses `YYYY-MM-DD HH:MM:SS.mmm`. The fractional part may be omitted.
std::optional<Timestamp> parse_timestamp(std::string_view text);
/// Parses `YYYY-MM-DD`.
std::optional<Timestamp> parse_date(std::string_view text);

/// Formats as `YYYY-MM-DD HH:MM:SS.mmm`.
std::string format_timestamp(Timestamp t);
/// Formats as `YYYY-MM-DD HH:MM:SS`.
std::string format_timestamp_seconds(Timestamp t);
std::string format_date(Timestamp t);

}  // namespace stopcast
