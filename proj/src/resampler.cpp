#include "stopcast/resampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace stopcast {

StoppageCategory categorize_stop(double duration_s) {
    if (!(duration_s >= 0.0) || !std::isfinite(duration_s))
        throw Error("stop duration must be a non-negative finite number");
    if (duration_s < kMinorLowerS) return StoppageCategory::Micro;
    if (duration_s < kBreakdownLowerS) return StoppageCategory::Minor;
    if (duration_s < kMajorLowerS) return StoppageCategory::Breakdown;
    return StoppageCategory::Major;
}

std::string_view category_name(StoppageCategory c) {
    switch (c) {
        case StoppageCategory::Micro: return "micro";
        case StoppageCategory::Minor: return "minor";
        case StoppageCategory::Breakdown: return "breakdown";
        case StoppageCategory::Major: return "major";
    }
    return "?";
}

std::pair<double, double> category_bounds(StoppageCategory c) {
    switch (c) {
        case StoppageCategory::Micro: return {0.0, kMinorLowerS};
        case StoppageCategory::Minor: return {kMinorLowerS, kBreakdownLowerS};
        case StoppageCategory::Breakdown: return {kBreakdownLowerS, kMajorLowerS};
        case StoppageCategory::Major: return {kMajorLowerS, std::numeric_limits<double>::infinity()};
    }
    return {0.0, 0.0};
}

bool is_supported_width(std::int64_t width_s) {
    switch (width_s) {
        case 300: case 600: case 900: case 1800: case 3600: case 86400: return true;
        default: return false;
    }
}

namespace {

void require_width(std::int64_t width_s) {
    if (!is_supported_width(width_s))
        throw Error("unsupported interval width " + std::to_string(width_s) + " s");
}

// Ends closer than this to a boundary are treated as ending on it.
constexpr double kBoundaryEpsMs = 1e-6;

}  // namespace

EventLog split_at_boundaries(const EventLog& log, std::int64_t width_s) {
    require_width(width_s);
    const std::int64_t width_ms = width_s * kMsPerSecond;
    EventLog out;
    out.provenance = log.provenance;
    out.events.reserve(log.events.size());
    for (const auto& e : log.events) {
        const double end_ms = static_cast<double>(e.timestamp.ms) + e.duration_s * 1000.0;
        Timestamp boundary = floor_to(e.timestamp, width_ms).plus_ms(width_ms);
        if (e.duration_unknown || static_cast<double>(boundary.ms) >= end_ms - kBoundaryEpsMs) {
            out.events.push_back(e);
            continue;
        }
        RawEvent piece = e;
        piece.duration_s = seconds_between(e.timestamp, boundary);
        double consumed = piece.duration_s;
        out.events.push_back(piece);
        while (true) {
            RawEvent next = e;
            next.timestamp = boundary;
            next.continuation = true;
            boundary = boundary.plus_ms(width_ms);
            if (static_cast<double>(boundary.ms) >= end_ms - kBoundaryEpsMs) {
                next.duration_s = e.duration_s - consumed;
                out.events.push_back(next);
                break;
            }
            next.duration_s = static_cast<double>(width_s);
            consumed += next.duration_s;
            out.events.push_back(next);
        }
    }
    return out;
}

IntervalSeries aggregate_intervals(const EventLog& split_log, std::int64_t width_s) {
    require_width(width_s);
    const std::int64_t width_ms = width_s * kMsPerSecond;
    IntervalSeries series;
    series.width_s = width_s;
    const auto& ev = split_log.events;
    if (ev.empty()) return series;

    const Timestamp first = floor_to(ev.front().timestamp, width_ms);
    Timestamp last = floor_to(ev.back().timestamp, width_ms);
    const std::size_t n = static_cast<std::size_t>((last.ms - first.ms) / width_ms) + 1;
    series.records.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        series.records[i].start = first.plus_ms(static_cast<std::int64_t>(i) * width_ms);
        series.records[i].width_s = width_s;
    }
    for (const auto& e : ev) {
        if (e.duration_unknown) continue;
        const auto idx = static_cast<std::size_t>((floor_to(e.timestamp, width_ms).ms - first.ms) / width_ms);
        auto& rec = series.records[idx];
        if (e.state == MachineState::Run) {
            rec.run_sum_s += e.duration_s;
            if (!e.continuation) ++rec.run_count;
        } else {
            const auto c = static_cast<int>(categorize_stop(e.source_duration_s));
            rec.stop_sum_s[c] += e.duration_s;
            if (!e.continuation) ++rec.stop_count[c];
        }
    }
    return series;
}

IntervalSeries resample(const EventLog& cleaned_log, std::int64_t width_s) {
    return aggregate_intervals(split_at_boundaries(cleaned_log, width_s), width_s);
}

IntervalSeries drop_idle_intervals(const IntervalSeries& series) {
    IntervalSeries out;
    out.width_s = series.width_s;
    std::copy_if(series.records.begin(), series.records.end(), std::back_inserter(out.records),
                 [](const IntervalRecord& r) {
                     return r.covered_s() > 0.0 || r.run_count > 0 ||
                            r.stop_count[0] + r.stop_count[1] + r.stop_count[2] + r.stop_count[3] > 0;
                 });
    return out;
}

IntervalSeries slice_dates(const IntervalSeries& series, Timestamp from, Timestamp to) {
    IntervalSeries out;
    out.width_s = series.width_s;
    for (const auto& r : series.records)
        if (r.start >= from && r.start < to) out.records.push_back(r);
    return out;
}

void write_interval_series(const IntervalSeries& series, std::ostream& out) {
    out << "timestamp";
    for (auto c : kAllCategories)
        out << ',' << category_name(c) << "_sum," << category_name(c) << "_count";
    out << ",run_sum,run_count\n";
    char buf[64];
    auto num = [&](double v) {
        int len = std::snprintf(buf, sizeof buf, "%.3f", v);
        return std::string_view(buf, static_cast<std::size_t>(len));
    };
    for (const auto& r : series.records) {
        out << format_timestamp_seconds(r.start);
        for (std::size_t c = 0; c < 4; ++c) out << ',' << num(r.stop_sum_s[c]) << ',' << r.stop_count[c];
        out << ',' << num(r.run_sum_s) << ',' << r.run_count << '\n';
    }
}

}  // namespace stopcast
