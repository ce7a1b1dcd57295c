#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "stopcast/event_log.hpp"

namespace stopcast {

/// Duration classes of a stoppage. Boundaries are half-open:
/// micro [0,10) s, minor [10,300) s, breakdown [300,2400) s, major [2400,inf) s.
enum class StoppageCategory : std::uint8_t { Micro = 0, Minor = 1, Breakdown = 2, Major = 3 };

inline constexpr std::array<StoppageCategory, 4> kAllCategories = {
    StoppageCategory::Micro, StoppageCategory::Minor, StoppageCategory::Breakdown,
    StoppageCategory::Major};

inline constexpr double kMinorLowerS = 10.0;
inline constexpr double kBreakdownLowerS = 300.0;
inline constexpr double kMajorLowerS = 2400.0;

/// Throws Error for a negative or non-finite duration.
StoppageCategory categorize_stop(double duration_s);
std::string_view category_name(StoppageCategory c);
/// Lower and upper duration bounds in seconds; the upper bound of Major is infinity.
std::pair<double, double> category_bounds(StoppageCategory c);

/// Interval widths accepted by the resampler: 5, 10, 15, 30 minutes, hourly and daily.
bool is_supported_width(std::int64_t width_s);

struct IntervalRecord {
    Timestamp start;
    std::int64_t width_s = 0;
    std::array<double, 4> stop_sum_s{};
    std::array<std::int64_t, 4> stop_count{};
    double run_sum_s = 0.0;
    std::int64_t run_count = 0;

    double total_stop_s() const { return stop_sum_s[0] + stop_sum_s[1] + stop_sum_s[2] + stop_sum_s[3]; }
    double covered_s() const { return total_stop_s() + run_sum_s; }
    double stop_sum(StoppageCategory c) const { return stop_sum_s[static_cast<int>(c)]; }
    std::int64_t count(StoppageCategory c) const { return stop_count[static_cast<int>(c)]; }
    bool operator==(const IntervalRecord&) const = default;
};

struct IntervalSeries {
    std::int64_t width_s = 0;
    std::vector<IntervalRecord> records;

    bool empty() const { return records.empty(); }
    std::size_t size() const { return records.size(); }
};

/// Splits every event crossing an interval boundary into pieces that each lie in one
/// interval. Pieces keep the original state and `source_duration_s`; all but the first
/// are marked as continuations. Throws Error for unsupported widths.
EventLog split_at_boundaries(const EventLog& log, std::int64_t width_s);

/// Sums piece durations per interval. Stops are classified by their source duration.
/// Counts only include first pieces, so a split event is counted once. Events with
/// unknown duration are ignored.
IntervalSeries aggregate_intervals(const EventLog& split_log, std::int64_t width_s);

/// split_at_boundaries followed by aggregate_intervals.
IntervalSeries resample(const EventLog& cleaned_log, std::int64_t width_s);

/// Drops records with no observed time at all (outside the schedule or data range).
IntervalSeries drop_idle_intervals(const IntervalSeries& series);

/// Keeps records whose start lies in [from, to).
IntervalSeries slice_dates(const IntervalSeries& series, Timestamp from, Timestamp to);

void write_interval_series(const IntervalSeries& series, std::ostream& out);

}  // namespace stopcast
