#include <doctest.h>

#include <random>
#include <sstream>

#include "stopcast/event_log.hpp"

using namespace stopcast;

namespace {

EventLog states_log(std::initializer_list<int> states, Timestamp start = make_timestamp(2019, 5, 30, 10)) {
    EventLog log;
    std::int64_t t = start.ms;
    for (int s : states) {
        log.events.push_back(make_event(Timestamp{t}, s ? MachineState::Run : MachineState::Stop, 1.0));
        t += kMsPerSecond;
    }
    return log;
}

std::vector<int> states_of(const EventLog& log) {
    std::vector<int> out;
    for (const auto& e : log.events) out.push_back(static_cast<int>(e.state));
    return out;
}

std::string error_of(std::string_view text) {
    try {
        parse_event_log(text);
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("parse a raw record") {
    const auto log = parse_event_log("2019-05-30 14:44:09.298,1,2.141\n");
    REQUIRE(log.size() == 1);
    const auto& e = log.events[0];
    CHECK(e.timestamp == make_timestamp(2019, 5, 30, 14, 44, 9, 298));
    CHECK(e.state == MachineState::Run);
    CHECK(e.duration_s == 2.141);
}

TEST_CASE("parse accepts header, comments and blank lines") {
    const auto log = parse_event_log(
        "# exported\ntimestamp,state,duration\n\n2019-05-30 14:44:09.298,1,2.141\n2019-05-30 14:44:12.866,0,3.567\r\n");
    CHECK(log.size() == 2);
    CHECK(parse_event_log("").empty());
}

TEST_CASE("parse errors name the line") {
    CHECK(error_of("2019-05-30 14:44:09.298,1,2\n2019-05-30 14:44:09.298,0,1\n") ==
          "non-increasing timestamp at line 2");
    CHECK(error_of("2019-05-30 14:44:09.298,2,1\n") == "state must be 0 or 1 at line 1");
    CHECK(error_of("2019-05-30,1,1\n") == "malformed timestamp at line 1");
    CHECK(error_of("2019-05-30 14:44:09.298,1,-1\n") == "negative duration at line 1");
    CHECK(error_of("2019-05-30 14:44:09.298,1,x\n") == "malformed duration at line 1");
    CHECK(error_of("2019-05-30 14:44:09.298,1\n") == "expected 3 fields at line 1");
    CHECK(error_of("timestamp,state,duration\n2019-05-30 14:44:09.298,1,1,1\n") == "expected 3 fields at line 2");
}

TEST_CASE("parse -> write -> parse round-trips") {
    std::mt19937_64 rng(5);
    EventLog log;
    std::int64_t t = make_timestamp(2019, 1, 1).ms;
    for (int i = 0; i < 500; ++i) {
        t += 1 + static_cast<std::int64_t>(rng() % 600000);
        log.events.push_back(make_event(Timestamp{t}, i % 2 ? MachineState::Stop : MachineState::Run,
                                        static_cast<double>(rng() % 1000000) / 1000.0));
    }
    std::ostringstream out;
    write_event_log(log, out);
    CHECK(parse_event_log(out.str()) == log);
}

TEST_CASE("dedup keeps the first event of each run") {
    auto r = remove_duplicate_states(states_log({1, 0, 0, 1}));
    CHECK(states_of(r.log) == std::vector<int>{1, 0, 1});
    CHECK(r.removed == 1);
    CHECK(r.log.events[1].timestamp == make_timestamp(2019, 5, 30, 10, 0, 1));

    r = remove_duplicate_states(states_log({1, 0, 1, 0}));
    CHECK(r.removed == 0);
    CHECK(states_of(r.log) == std::vector<int>{1, 0, 1, 0});

    r = remove_duplicate_states(states_log({1, 1, 1}));
    CHECK(states_of(r.log) == std::vector<int>{1});
    CHECK(r.removed == 2);
}

TEST_CASE("dedup agrees with a run-scan oracle and is idempotent") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        EventLog log;
        const int n = static_cast<int>(rng() % 40);
        for (int i = 0; i < n; ++i)
            log.events.push_back(make_event(Timestamp{i * kMsPerSecond}, rng() % 2 ? MachineState::Run : MachineState::Stop, 0));
        std::vector<std::int64_t> expected;
        for (int i = 0; i < n; ++i)
            if (i == 0 || log.events[i].state != log.events[i - 1].state) expected.push_back(log.events[i].timestamp.ms);
        const auto once = remove_duplicate_states(log);
        std::vector<std::int64_t> got;
        for (const auto& e : once.log.events) got.push_back(e.timestamp.ms);
        REQUIRE(got == expected);
        REQUIRE(once.removed == log.size() - expected.size());
        REQUIRE(check_event_log(once.log, true).empty());
        const auto twice = remove_duplicate_states(once.log);
        REQUIRE(twice.log == once.log);
        REQUIRE(twice.removed == 0);
    }
}

TEST_CASE("durations move onto the state they belong to") {
    const auto log = parse_event_log("2019-05-30 14:44:09.298,1,2.141\n2019-05-30 14:44:12.866,0,3.567\n");
    const auto r = reassign_durations(log);
    CHECK(std::abs(r.events[0].duration_s - 3.567) <= 0.002);
    CHECK_FALSE(r.events[0].duration_unknown);
    CHECK(r.events[1].duration_unknown);
    CHECK(r.events[1].duration_s == 0.0);

    const auto single = reassign_durations(states_log({1}));
    CHECK(single.events[0].duration_unknown);
    CHECK(single.events[0].duration_s == 0.0);

    const auto three = reassign_durations(states_log({1, 0, 1}));
    CHECK(three.events[0].duration_s == 1.0);
    CHECK(three.events[1].duration_s == 1.0);
    CHECK(three.events[2].duration_unknown);
}

TEST_CASE("reassigned durations telescope to the log span") {
    std::mt19937_64 rng(3);
    EventLog log;
    std::int64_t t = 0;
    for (int i = 0; i < 1000; ++i) {
        t += 1 + static_cast<std::int64_t>(rng() % 100000);
        log.events.push_back(make_event(Timestamp{t}, i % 2 ? MachineState::Stop : MachineState::Run, 0));
    }
    const auto r = reassign_durations(log);
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < r.size(); ++i) {
        REQUIRE(std::abs(r.events[i].duration_s - seconds_between(r.events[i].timestamp, r.events[i + 1].timestamp)) <=
                0.001);
        sum += r.events[i].duration_s;
    }
    CHECK(std::abs(sum - seconds_between(r.events.front().timestamp, r.events.back().timestamp)) <=
          0.001 * static_cast<double>(r.size()));
}

TEST_CASE("schedule validation and membership") {
    CHECK_THROWS_AS(OperatingSchedule({{0, 10 * kMsPerHour, 9 * kMsPerHour}}), Error);
    CHECK_THROWS_AS(OperatingSchedule({{0, 0, 12 * kMsPerHour}, {0, 11 * kMsPerHour, 13 * kMsPerHour}}), Error);
    const auto plant = OperatingSchedule::plant_default();
    CHECK(plant.contains(make_timestamp(2019, 5, 27, 3)));       // Monday night
    CHECK(plant.contains(make_timestamp(2019, 6, 1, 21, 59)));   // Saturday
    CHECK_FALSE(plant.contains(make_timestamp(2019, 6, 1, 22)));  // Saturday after close
    CHECK_FALSE(plant.contains(make_timestamp(2019, 6, 2, 12)));  // Sunday
    // Monday 00:00 through Saturday 22:00 is one contiguous block.
    CHECK(plant.block_end(make_timestamp(2019, 5, 27, 3)) == make_timestamp(2019, 6, 1, 22));
}

TEST_CASE("schedule filter drops events outside the windows") {
    std::vector<ScheduleWindow> w;
    for (int d = 0; d < 6; ++d) w.push_back({d, 6 * kMsPerHour, 22 * kMsPerHour});
    const OperatingSchedule mon_sat(w);

    EventLog log;
    log.events.push_back(make_event(make_timestamp(2019, 6, 1, 10), MachineState::Run, 0));   // Saturday
    log.events.push_back(make_event(make_timestamp(2019, 6, 2, 3), MachineState::Stop, 0));   // Sunday 03:00
    log.events.push_back(make_event(make_timestamp(2019, 6, 3, 7), MachineState::Stop, 0));   // Monday
    auto r = apply_schedule_filter(log, mon_sat);
    CHECK(r.removed == 1);
    REQUIRE(r.log.size() == 2);
    CHECK(r.log.events[1].timestamp == make_timestamp(2019, 6, 3, 7));

    CHECK_THROWS_WITH(apply_schedule_filter(log, OperatingSchedule{}), "schedule must contain at least one window");

    const auto inside = states_log({1, 0, 1, 0}, make_timestamp(2019, 6, 3, 8));
    r = apply_schedule_filter(inside, mon_sat);
    CHECK(r.removed == 0);
    CHECK(r.log == inside);
}

TEST_CASE("schedule filter matches a per-event membership oracle") {
    std::vector<ScheduleWindow> w;
    for (int d = 0; d < 6; ++d) w.push_back({d, 6 * kMsPerHour, 22 * kMsPerHour});
    const OperatingSchedule sched(w);
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        EventLog log;
        std::int64_t t = make_timestamp(2019, 6, 1).ms;
        for (int i = 0; i < 10; ++i) {
            t += 1 + static_cast<std::int64_t>(rng() % (8 * kMsPerHour));
            log.events.push_back(make_event(Timestamp{t}, i % 2 ? MachineState::Stop : MachineState::Run, 0));
        }
        EventLog expected;
        for (const auto& e : log.events) {
            const auto tod = time_of_day_ms(e.timestamp);
            if (weekday(e.timestamp) < 6 && tod >= 6 * kMsPerHour && tod < 22 * kMsPerHour)
                if (expected.empty() || expected.events.back().state != e.state) expected.events.push_back(e);
        }
        const auto r = apply_schedule_filter(log, sched);
        REQUIRE(r.log.size() == expected.size());
        for (std::size_t i = 0; i < expected.size(); ++i) REQUIRE(r.log.events[i].timestamp == expected.events[i].timestamp);
        REQUIRE(r.removed == log.size() - expected.size());
        REQUIRE(check_event_log(r.log, true).empty());
    }
}

TEST_CASE("cleaning never attributes idle time to a state") {
    // RUN on Saturday 21:00 and the next event on Monday: the RUN ends at closing time.
    EventLog log;
    log.events.push_back(make_event(make_timestamp(2019, 6, 1, 21), MachineState::Run, 0));
    log.events.push_back(make_event(make_timestamp(2019, 6, 3, 1), MachineState::Stop, 0));
    log.events.push_back(make_event(make_timestamp(2019, 6, 3, 2), MachineState::Run, 0));
    const auto c = clean_event_log(log, OperatingSchedule::plant_default());
    REQUIRE(c.log.size() == 3);
    CHECK(c.log.events[0].duration_s == 3600.0);
    CHECK(c.log.events[1].duration_s == 3600.0);
    CHECK(c.log.events[2].duration_unknown);
}
