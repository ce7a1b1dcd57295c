#include "stopcast/event_log.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace stopcast {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

[[noreturn]] void fail_at(std::size_t line, const std::string& what) {
    throw Error(what + " at line " + std::to_string(line));
}

std::int64_t duration_ms(double seconds) { return std::llround(seconds * 1000.0); }

}  // namespace

RawEvent make_event(Timestamp t, MachineState state, double duration_s) {
    RawEvent e;
    e.timestamp = t;
    e.state = state;
    e.duration_s = duration_s;
    e.source_duration_s = duration_s;
    return e;
}

// ---------------------------------------------------------------------------
// OperatingSchedule

OperatingSchedule::OperatingSchedule(std::vector<ScheduleWindow> windows)
    : windows_(std::move(windows)) {
    for (const auto& w : windows_) {
        if (w.weekday < 0 || w.weekday > 6) throw Error("schedule window weekday out of range");
        if (w.start_ms < 0 || w.end_ms > kMsPerDay || w.start_ms >= w.end_ms)
            throw Error("schedule window must satisfy 00:00 <= start < end <= 24:00");
    }
    std::sort(windows_.begin(), windows_.end(), [](const auto& a, const auto& b) {
        return std::tie(a.weekday, a.start_ms) < std::tie(b.weekday, b.start_ms);
    });
    for (std::size_t i = 1; i < windows_.size(); ++i) {
        const auto& a = windows_[i - 1];
        const auto& b = windows_[i];
        if (a.weekday == b.weekday && b.start_ms < a.end_ms)
            throw Error("schedule windows overlap on weekday " + std::to_string(a.weekday));
    }
}

OperatingSchedule OperatingSchedule::plant_default() {
    std::vector<ScheduleWindow> w;
    for (int d = 0; d < 5; ++d) w.push_back({d, 0, kMsPerDay});
    w.push_back({5, 0, 22 * kMsPerHour});
    return OperatingSchedule(std::move(w));
}

bool OperatingSchedule::contains(Timestamp t) const {
    const int wd = weekday(t);
    const auto tod = time_of_day_ms(t);
    return std::any_of(windows_.begin(), windows_.end(), [&](const ScheduleWindow& w) {
        return w.weekday == wd && tod >= w.start_ms && tod < w.end_ms;
    });
}

Timestamp OperatingSchedule::block_end(Timestamp t) const {
    Timestamp day = start_of_day(t);
    int wd = weekday(t);
    auto tod = time_of_day_ms(t);
    auto it = std::find_if(windows_.begin(), windows_.end(), [&](const ScheduleWindow& w) {
        return w.weekday == wd && tod >= w.start_ms && tod < w.end_ms;
    });
    if (it == windows_.end()) throw Error("block_end: instant outside schedule");
    std::int64_t end = it->end_ms;
    // A window reaching midnight continues into a window opening at 00:00 the next day.
    for (int hops = 0; end == kMsPerDay && hops < 7; ++hops) {
        day = day.plus_ms(kMsPerDay);
        wd = (wd + 1) % 7;
        auto next = std::find_if(windows_.begin(), windows_.end(), [&](const ScheduleWindow& w) {
            return w.weekday == wd && w.start_ms == 0;
        });
        if (next == windows_.end()) return day;
        end = next->end_ms;
    }
    return day.plus_ms(end);
}

std::vector<std::pair<Timestamp, Timestamp>> OperatingSchedule::blocks(Timestamp from,
                                                                       Timestamp to) const {
    std::vector<std::pair<Timestamp, Timestamp>> out;
    for (Timestamp day = start_of_day(from); day < to; day = day.plus_ms(kMsPerDay)) {
        const int wd = weekday(day);
        for (const auto& w : windows_) {
            if (w.weekday != wd) continue;
            Timestamp a = std::max(from, day.plus_ms(w.start_ms));
            Timestamp b = std::min(to, day.plus_ms(w.end_ms));
            if (a >= b) continue;
            if (!out.empty() && out.back().second == a)
                out.back().second = b;
            else
                out.emplace_back(a, b);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// CSV

EventLog parse_event_log(std::istream& in, std::string provenance) {
    EventLog log;
    log.provenance = std::move(provenance);
    std::string raw;
    std::size_t line_no = 0;
    bool seen_data_or_header = false;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        if (!seen_data_or_header) {
            seen_data_or_header = true;
            if (line.starts_with("timestamp")) continue;
        }
        std::string_view fields[3];
        std::size_t n = 0;
        while (true) {
            auto comma = line.find(',');
            if (n == 3) fail_at(line_no, "expected 3 fields");
            fields[n++] = trim(line.substr(0, comma));
            if (comma == std::string_view::npos) break;
            line.remove_prefix(comma + 1);
        }
        if (n != 3) fail_at(line_no, "expected 3 fields");

        auto ts = parse_timestamp(fields[0]);
        if (!ts) fail_at(line_no, "malformed timestamp");

        MachineState state;
        if (fields[1] == "0")
            state = MachineState::Stop;
        else if (fields[1] == "1")
            state = MachineState::Run;
        else
            fail_at(line_no, "state must be 0 or 1");

        double duration = 0.0;
        auto d = fields[2];
        auto [ptr, ec] = std::from_chars(d.data(), d.data() + d.size(), duration);
        if (d.empty() || ec != std::errc{} || ptr != d.data() + d.size() || !std::isfinite(duration))
            fail_at(line_no, "malformed duration");
        if (duration < 0.0) fail_at(line_no, "negative duration");

        if (!log.events.empty() && *ts <= log.events.back().timestamp)
            fail_at(line_no, "non-increasing timestamp");
        log.events.push_back(make_event(*ts, state, duration));
    }
    return log;
}

EventLog parse_event_log(std::string_view text, std::string provenance) {
    std::istringstream in{std::string(text)};
    return parse_event_log(in, std::move(provenance));
}

void write_event_log(const EventLog& log, std::ostream& out) {
    out << "timestamp,state,duration\n";
    char buf[64];
    for (const auto& e : log.events) {
        auto [end, ec] = std::to_chars(buf, buf + sizeof buf, e.duration_s);
        out << format_timestamp(e.timestamp) << ',' << static_cast<int>(e.state) << ','
            << std::string_view(buf, static_cast<std::size_t>(end - buf)) << '\n';
    }
}

// ---------------------------------------------------------------------------
// Cleaning

DedupResult remove_duplicate_states(const EventLog& log) {
    DedupResult r;
    r.log.provenance = log.provenance;
    r.log.events.reserve(log.events.size());
    for (const auto& e : log.events) {
        if (!r.log.events.empty() && r.log.events.back().state == e.state) continue;
        r.log.events.push_back(e);
    }
    r.removed = log.events.size() - r.log.events.size();
    return r;
}

EventLog reassign_durations(const EventLog& log) {
    EventLog out = log;
    auto& ev = out.events;
    for (std::size_t i = 0; i < ev.size(); ++i) {
        if (i + 1 < ev.size()) {
            ev[i].duration_s = seconds_between(ev[i].timestamp, ev[i + 1].timestamp);
            ev[i].duration_unknown = false;
        } else {
            ev[i].duration_s = 0.0;
            ev[i].duration_unknown = true;
        }
        ev[i].source_duration_s = ev[i].duration_s;
        ev[i].continuation = false;
    }
    return out;
}

FilterResult apply_schedule_filter(const EventLog& log, const OperatingSchedule& schedule) {
    if (schedule.empty()) throw Error("schedule must contain at least one window");
    EventLog inside;
    inside.provenance = log.provenance;
    for (const auto& e : log.events)
        if (schedule.contains(e.timestamp)) inside.events.push_back(e);
    auto dedup = remove_duplicate_states(inside);
    for (auto& e : dedup.log.events) {
        if (e.duration_unknown) continue;
        const Timestamp limit = schedule.block_end(e.timestamp);
        if (e.timestamp.ms + duration_ms(e.duration_s) > limit.ms) {
            e.duration_s = seconds_between(e.timestamp, limit);
            e.source_duration_s = e.duration_s;
        }
    }
    FilterResult r;
    r.removed = log.events.size() - dedup.log.events.size();
    r.log = std::move(dedup.log);
    return r;
}

CleaningReport clean_event_log(const EventLog& raw, const OperatingSchedule& schedule) {
    CleaningReport rep;
    auto dedup = remove_duplicate_states(raw);
    rep.duplicates_removed = dedup.removed;
    auto shifted = reassign_durations(dedup.log);
    auto filtered = apply_schedule_filter(shifted, schedule);
    rep.schedule_removed = filtered.removed;
    rep.log = std::move(filtered.log);
    return rep;
}

std::string check_event_log(const EventLog& log, bool require_alternation) {
    for (std::size_t i = 0; i < log.events.size(); ++i) {
        const auto& e = log.events[i];
        if (e.state != MachineState::Run && e.state != MachineState::Stop)
            return "invalid state at event " + std::to_string(i);
        if (!(e.duration_s >= 0.0)) return "negative duration at event " + std::to_string(i);
        if (i == 0) continue;
        const auto& p = log.events[i - 1];
        if (e.timestamp <= p.timestamp)
            return "non-increasing timestamp at event " + std::to_string(i);
        if (require_alternation && e.state == p.state)
            return "repeated state at event " + std::to_string(i);
    }
    return {};
}

}  // namespace stopcast
