#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "stopcast/resampler.hpp"

using namespace stopcast;

namespace {

RawEvent cleaned_event(Timestamp t, MachineState s, double duration_s) {
    RawEvent e = make_event(t, s, duration_s);
    return e;
}

EventLog random_cleaned_log(std::uint64_t seed, int n) {
    std::mt19937_64 rng(seed);
    EventLog log;
    std::int64_t t = make_timestamp(2019, 3, 4, 0, 0, 0, static_cast<int>(rng() % 1000)).ms;
    for (int i = 0; i < n; ++i) {
        // Mostly short events with an occasional multi-hour one.
        std::int64_t d = 1 + static_cast<std::int64_t>(rng() % 900000);
        if (rng() % 50 == 0) d += static_cast<std::int64_t>(rng() % (30 * kMsPerHour));
        log.events.push_back(cleaned_event(Timestamp{t}, i % 2 ? MachineState::Stop : MachineState::Run,
                                           static_cast<double>(d) / 1000.0));
        t += d;
    }
    return log;
}

}  // namespace

TEST_CASE("stop categories use half-open bounds") {
    CHECK(categorize_stop(120) == StoppageCategory::Minor);
    CHECK(categorize_stop(9.9) == StoppageCategory::Micro);
    CHECK(categorize_stop(0) == StoppageCategory::Micro);
    CHECK(categorize_stop(10) == StoppageCategory::Minor);
    CHECK(categorize_stop(300) == StoppageCategory::Breakdown);
    CHECK(categorize_stop(2400) == StoppageCategory::Major);
    CHECK_THROWS_AS(categorize_stop(-1), Error);
    CHECK_THROWS_AS(categorize_stop(NAN), Error);
}

TEST_CASE("categorize_stop agrees with the bound table on a sweep") {
    for (int tenth = 0; tenth <= 30000; ++tenth) {
        const double d = tenth / 10.0;
        int hits = 0;
        StoppageCategory expected{};
        for (auto c : kAllCategories) {
            const auto [lo, hi] = category_bounds(c);
            if (d >= lo && d < hi) {
                ++hits;
                expected = c;
            }
        }
        REQUIRE(hits == 1);
        REQUIRE(categorize_stop(d) == expected);
    }
}

TEST_CASE("the six-minute stop at 09:09 splits into two pieces") {
    EventLog log;
    log.events.push_back(cleaned_event(make_timestamp(2019, 5, 30, 9, 9), MachineState::Stop, 360));
    const auto split = split_at_boundaries(log, 300);
    REQUIRE(split.size() == 2);
    CHECK(split.events[0].timestamp == make_timestamp(2019, 5, 30, 9, 9));
    CHECK(split.events[0].duration_s == 60.0);
    CHECK_FALSE(split.events[0].continuation);
    CHECK(split.events[1].timestamp == make_timestamp(2019, 5, 30, 9, 10));
    CHECK(split.events[1].duration_s == 300.0);
    CHECK(split.events[1].continuation);
    for (const auto& p : split.events) {
        CHECK(p.state == MachineState::Stop);
        CHECK(p.source_duration_s == 360.0);
    }

    const auto series = aggregate_intervals(split, 300);
    REQUIRE(series.size() == 2);
    CHECK(series.records[0].start == make_timestamp(2019, 5, 30, 9, 5));
    CHECK(series.records[0].stop_sum(StoppageCategory::Breakdown) == 60.0);
    CHECK(series.records[0].count(StoppageCategory::Breakdown) == 1);
    CHECK(series.records[1].start == make_timestamp(2019, 5, 30, 9, 10));
    CHECK(series.records[1].stop_sum(StoppageCategory::Breakdown) == 300.0);
    CHECK(series.records[1].count(StoppageCategory::Breakdown) == 0);
}

TEST_CASE("events inside one interval are not split") {
    EventLog log;
    log.events.push_back(cleaned_event(make_timestamp(2019, 5, 30, 9, 1), MachineState::Run, 120));
    log.events.push_back(cleaned_event(make_timestamp(2019, 5, 30, 9, 3), MachineState::Stop, 120));
    CHECK(split_at_boundaries(log, 300) == log);
    CHECK_THROWS_AS(split_at_boundaries(log, 420), Error);
    CHECK(aggregate_intervals(EventLog{}, 3600).empty());
}

TEST_CASE("a two-hour stop splits like a second-by-second oracle") {
    EventLog log;
    log.events.push_back(cleaned_event(make_timestamp(2019, 5, 30, 9, 58), MachineState::Stop, 7200));
    const auto split = split_at_boundaries(log, 3600);
    std::map<std::int64_t, double> oracle;
    const auto start = make_timestamp(2019, 5, 30, 9, 58).ms;
    for (std::int64_t s = 0; s < 7200; ++s) oracle[floor_to(Timestamp{start + s * 1000}, kMsPerHour).ms] += 1.0;
    REQUIRE(split.size() == oracle.size());
    std::size_t i = 0;
    for (const auto& [bucket, secs] : oracle) {
        CHECK(floor_to(split.events[i].timestamp, kMsPerHour).ms == bucket);
        CHECK(split.events[i].duration_s == secs);
        ++i;
    }
    CHECK(split.events[0].duration_s == 120.0);
    CHECK(split.events[1].duration_s == 3600.0);
    CHECK(split.events[2].duration_s == 3480.0);
}

TEST_CASE("alternating day matches a per-second accounting oracle") {
    EventLog log;
    const auto day = make_timestamp(2019, 5, 27);
    for (std::int64_t t = 0, i = 0; t < kMsPerDay; ++i) {
        const bool run = i % 2 == 0;
        const double d = run ? 600.0 : 60.0;
        log.events.push_back(cleaned_event(day.plus_ms(t), run ? MachineState::Run : MachineState::Stop, d));
        t += static_cast<std::int64_t>(d * 1000);
    }
    // Trim the tail so the log ends exactly at midnight.
    double total = 0;
    for (auto& e : log.events) {
        const double end = total + e.duration_s;
        if (end > 86400.0) e.duration_s = 86400.0 - total;
        total += e.duration_s;
    }
    const auto series = resample(log, 3600);
    std::vector<double> stop(24, 0.0);
    for (const auto& e : log.events) {
        if (e.state != MachineState::Stop) continue;
        const auto s0 = (e.timestamp.ms - day.ms) / 1000;
        for (std::int64_t s = s0; s < s0 + static_cast<std::int64_t>(e.duration_s); ++s) stop[s / 3600] += 1.0;
    }
    REQUIRE(series.size() >= 24);
    for (int h = 0; h < 24; ++h) {
        CHECK(series.records[h].stop_sum(StoppageCategory::Minor) == stop[h]);
        CHECK(series.records[h].covered_s() == 3600.0);
    }
}

TEST_CASE("duration and count conservation on 10,000 random events") {
    const auto log = random_cleaned_log(2024, 10000);
    for (std::int64_t width : {300, 600, 900, 1800, 3600, 86400}) {
        const auto split = split_at_boundaries(log, width);
        const auto series = aggregate_intervals(split, width);
        double in_run = 0, in_stop = 0, out_run = 0, out_stop = 0;
        std::int64_t in_count = 0, out_count = 0;
        for (const auto& e : log.events) (e.state == MachineState::Run ? in_run : in_stop) += e.duration_s;
        in_count = static_cast<std::int64_t>(log.size());
        for (const auto& r : series.records) {
            out_run += r.run_sum_s;
            out_stop += r.total_stop_s();
            out_count += r.run_count;
            for (auto c : r.stop_count) out_count += c;
            REQUIRE(r.covered_s() <= static_cast<double>(width) + 1e-6);
        }
        CHECK(std::abs(in_run - out_run) < 1e-6);
        CHECK(std::abs(in_stop - out_stop) < 1e-6);
        CHECK(in_count == out_count);
        // Each event's pieces sum back to it.
        std::size_t j = 0;
        for (const auto& e : log.events) {
            double s = 0;
            do s += split.events[j++].duration_s;
            while (j < split.size() && split.events[j].continuation);
            REQUIRE(std::abs(s - e.duration_s) < 1e-6);
        }
        CHECK(split_at_boundaries(split, width) == split);
    }
}

TEST_CASE("coarse resampling equals summed fine records") {
    const auto log = random_cleaned_log(99, 3000);
    const auto fine = resample(log, 300);
    const auto coarse = resample(log, 3600);
    std::map<std::int64_t, IntervalRecord> summed;
    for (const auto& r : fine.records) {
        auto& s = summed[floor_to(r.start, kMsPerHour).ms];
        for (int c = 0; c < 4; ++c) s.stop_sum_s[c] += r.stop_sum_s[c];
        s.run_sum_s += r.run_sum_s;
    }
    for (const auto& r : coarse.records) {
        const auto& s = summed[r.start.ms];
        for (int c = 0; c < 4; ++c) REQUIRE(std::abs(s.stop_sum_s[c] - r.stop_sum_s[c]) < 1e-6);
        REQUIRE(std::abs(s.run_sum_s - r.run_sum_s) < 1e-6);
    }
}

TEST_CASE("flagged final events are left out of the aggregates") {
    EventLog log;
    log.events.push_back(cleaned_event(make_timestamp(2019, 5, 30, 9), MachineState::Run, 30));
    auto last = cleaned_event(make_timestamp(2019, 5, 30, 9, 0, 30), MachineState::Stop, 0);
    last.duration_unknown = true;
    log.events.push_back(last);
    const auto s = resample(log, 3600);
    REQUIRE(s.size() == 1);
    CHECK(s.records[0].run_sum_s == 30.0);
    CHECK(s.records[0].total_stop_s() == 0.0);
    CHECK(s.records[0].stop_count[0] + s.records[0].stop_count[1] == 0);
}

TEST_CASE("idle intervals are dropped and date slices are half-open") {
    EventLog log;
    log.events.push_back(cleaned_event(make_timestamp(2019, 5, 30, 9), MachineState::Run, 60));
    log.events.push_back(cleaned_event(make_timestamp(2019, 5, 30, 12), MachineState::Stop, 60));
    const auto s = resample(log, 3600);
    CHECK(s.size() == 4);
    const auto busy = drop_idle_intervals(s);
    CHECK(busy.size() == 2);
    const auto sl = slice_dates(s, make_timestamp(2019, 5, 30, 10), make_timestamp(2019, 5, 30, 12));
    CHECK(sl.size() == 2);
}

TEST_CASE("interval CSV header") {
    IntervalSeries s;
    s.width_s = 3600;
    std::ostringstream out;
    write_interval_series(s, out);
    CHECK(out.str() ==
          "timestamp,micro_sum,micro_count,minor_sum,minor_count,breakdown_sum,breakdown_count,major_sum,major_count,"
          "run_sum,run_count\n");
}
