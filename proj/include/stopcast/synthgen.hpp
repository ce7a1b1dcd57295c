#pragma once

#include <array>
#include <cstdint>
#include <random>

#include "stopcast/event_log.hpp"
#include "stopcast/resampler.hpp"

namespace stopcast {

/// Log-normal law in log-seconds.
struct LogNormal {
    double mu = 0.0;
    double sigma = 1.0;
};

/// One component of the stop-duration mixture, truncated to its category's range.
struct StopComponent {
    double weight = 0.0;
    LogNormal law;
};

/// Parameters of the alternating RUN/STOP process. The defaults are calibrated so that
/// one year under the plant schedule reproduces the reference operating statistics.
struct GeneratorConfig {
    std::uint64_t seed = 42;
    OperatingSchedule schedule = OperatingSchedule::plant_default();
    Timestamp start = make_timestamp(2019, 1, 1);
    Timestamp end = make_timestamp(2020, 1, 1);

    LogNormal run{5.3, 0.85};
    /// Indexed by StoppageCategory.
    std::array<StopComponent, 4> stops{{
        {0.374, {1.2, 0.7}},
        {0.5756, {4.45, 0.75}},
        {0.0452, {6.8, 0.6}},
        {0.0052, {10.0, 0.5}},
    }};
    /// Multiplier on run durations per weekday, Monday first.
    std::array<double, 7> weekday_multiplier{1.0, 1.0, 1.0, 1.0, 1.0, 0.9, 1.0};
    /// Relative amplitude of the yearly sinusoid on run durations and its peak day of year.
    double seasonal_amplitude = 0.1;
    int seasonal_peak_day = 152;
    /// Standard deviation of a per-day log-normal factor on run durations.
    double daily_sigma = 0.05;
    /// Upper truncation of major stops. Keeps a single draw from wiping out whole days.
    double major_cap_s = 8 * 3600.0;

    /// Throws Error("invalid mixture: ...") or another field-specific message.
    void validate() const;
};

/// Simulates the machine inside every operating block of [start, end). Each block
/// starts in RUN and ends in STOP; the raw duration column holds the time since the
/// previous event, the way the machine logs it.
EventLog generate_event_log(const GeneratorConfig& cfg);

struct DistributionSummary {
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double median = 0.0;
    double std = 0.0;  // sample standard deviation; 0 for fewer than two values
};

struct LogSummary {
    /// RUN hours per calendar day that has any RUN time.
    DistributionSummary daily_run_hours;
    std::size_t operating_days = 0;
    std::array<std::size_t, 4> stop_counts{};
    std::size_t total_stops = 0;
    double mean_daily_stops = 0.0;
};

/// Operating statistics of a cleaned log. RUN time is split at midnight before it is
/// attributed to days; stops with unknown duration are not counted.
LogSummary summarize_log(const EventLog& cleaned_log);

/// Deterministic uniform and normal draws on top of mt19937_64, identical across
/// standard library implementations.
class Random {
public:
    explicit Random(std::uint64_t seed) : engine_(seed) {}
    /// Uniform on [0, 1).
    double uniform();
    double normal();
    std::uint64_t next() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

}  // namespace stopcast
