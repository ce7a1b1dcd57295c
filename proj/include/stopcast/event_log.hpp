#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "stopcast/time.hpp"

namespace stopcast {

enum class MachineState : std::uint8_t { Stop = 0, Run = 1 };

/// One machine-state transition.
///
/// In a freshly parsed log `duration_s` is the raw recorded value (the duration of the
/// *previous* state). After `reassign_durations` it is the duration of this event's own
/// state. `source_duration_s` and `continuation` are populated by boundary splitting:
/// every piece carries the duration of the event it came from, and all pieces but the
/// first are continuations.
struct RawEvent {
    Timestamp timestamp;
    MachineState state = MachineState::Run;
    double duration_s = 0.0;
    bool duration_unknown = false;
    bool continuation = false;
    double source_duration_s = 0.0;

    bool operator==(const RawEvent&) const = default;
};

RawEvent make_event(Timestamp t, MachineState state, double duration_s);

struct EventLog {
    std::vector<RawEvent> events;
    std::string provenance;

    bool empty() const { return events.empty(); }
    std::size_t size() const { return events.size(); }
    bool operator==(const EventLog&) const = default;
};

/// A weekly window [start, end) on one weekday, as milliseconds after midnight.
struct ScheduleWindow {
    int weekday = 0;  // Monday = 0
    std::int64_t start_ms = 0;
    std::int64_t end_ms = kMsPerDay;

    bool operator==(const ScheduleWindow&) const = default;
};

/// Weekly operating windows of the production line.
class OperatingSchedule {
public:
    OperatingSchedule() = default;
    /// Throws Error if a window is empty, out of range, or overlaps another one.
    explicit OperatingSchedule(std::vector<ScheduleWindow> windows);

    /// Monday-Friday around the clock plus Saturday 00:00-22:00.
    static OperatingSchedule plant_default();

    const std::vector<ScheduleWindow>& windows() const { return windows_; }
    bool empty() const { return windows_.empty(); }
    bool contains(Timestamp t) const;

    /// End of the contiguous operating block that contains `t`. Windows that abut across
    /// midnight are merged into one block. Requires contains(t).
    Timestamp block_end(Timestamp t) const;

    /// Contiguous operating blocks intersecting [from, to), clipped to that range.
    std::vector<std::pair<Timestamp, Timestamp>> blocks(Timestamp from, Timestamp to) const;

    bool operator==(const OperatingSchedule&) const = default;

private:
    std::vector<ScheduleWindow> windows_;  // sorted by (weekday, start)
};

/// Reads `timestamp,state,duration` CSV. A header row and `#` comment lines are accepted.
/// Throws Error naming the offending line on malformed input.
EventLog parse_event_log(std::istream& in, std::string provenance = {});
EventLog parse_event_log(std::string_view text, std::string provenance = {});

/// Writes the log in the same CSV format `parse_event_log` reads.
void write_event_log(const EventLog& log, std::ostream& out);

struct DedupResult {
    EventLog log;
    std::size_t removed = 0;
};

/// Keeps the first event of every run of equal consecutive states.
DedupResult remove_duplicate_states(const EventLog& log);

/// Gives every event the duration of its own state: the gap to the next timestamp.
/// The final event has no successor; it gets duration 0 and `duration_unknown`.
EventLog reassign_durations(const EventLog& log);

struct FilterResult {
    EventLog log;
    std::size_t removed = 0;
};

/// Drops events that start outside every schedule window, then repairs alternation.
/// Surviving durations are clipped at the end of their operating block so that idle
/// time between blocks is never attributed to a state.
FilterResult apply_schedule_filter(const EventLog& log, const OperatingSchedule& schedule);

struct CleaningReport {
    EventLog log;
    std::size_t duplicates_removed = 0;
    std::size_t schedule_removed = 0;
};

/// dedup -> reassign durations -> schedule filter.
CleaningReport clean_event_log(const EventLog& raw, const OperatingSchedule& schedule);

/// Verifies the structural invariants of a log: strictly increasing timestamps, binary
/// states, non-negative durations and, when `require_alternation`, no repeated states.
/// Returns an empty string when valid, else a description of the first violation.
std::string check_event_log(const EventLog& log, bool require_alternation);

}  // namespace stopcast
