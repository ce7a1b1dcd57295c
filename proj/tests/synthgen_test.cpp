#include <doctest.h>

#include <cmath>
#include <sstream>

#include "stopcast/synthgen.hpp"

using namespace stopcast;

namespace {

GeneratorConfig month() {
    GeneratorConfig g;
    g.start = make_timestamp(2019, 4, 1);
    g.end = make_timestamp(2019, 5, 1);
    return g;
}

std::string csv(const EventLog& log) {
    std::ostringstream out;
    write_event_log(log, out);
    return out.str();
}

}  // namespace

TEST_CASE("same seed, same log") {
    const auto a = generate_event_log(month());
    const auto b = generate_event_log(month());
    CHECK(a == b);
    CHECK(csv(a) == csv(b));
    auto other = month();
    other.seed = 43;
    CHECK_FALSE(generate_event_log(other) == a);
}

TEST_CASE("uniform and normal draws are reproducible and sane") {
    Random r(1), s(1);
    double sum = 0, sq = 0;
    for (int i = 0; i < 20000; ++i) {
        const double u = r.uniform();
        REQUIRE(u == s.uniform());
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        const double z = r.normal();
        s.normal();
        sum += z;
        sq += z * z;
    }
    CHECK(std::abs(sum / 20000) < 0.03);
    CHECK(std::abs(sq / 20000 - 1.0) < 0.05);
}

TEST_CASE("a minor-only mixture produces no breakdowns or majors") {
    auto g = month();
    g.stops[0].weight = 0;
    g.stops[1].weight = 1;
    g.stops[2].weight = 0;
    g.stops[3].weight = 0;
    const auto cleaned = clean_event_log(generate_event_log(g), g.schedule).log;
    const auto s = summarize_log(cleaned);
    CHECK(s.stop_counts[0] == 0);
    CHECK(s.stop_counts[1] > 1000);
    CHECK(s.stop_counts[2] == 0);
    CHECK(s.stop_counts[3] == 0);
}

TEST_CASE("invalid mixtures are rejected") {
    auto g = month();
    g.stops[1].weight = 0.4;
    CHECK_THROWS_AS(generate_event_log(g), Error);
    try {
        g.validate();
    } catch (const Error& e) {
        CHECK(std::string(e.what()).starts_with("invalid mixture"));
    }
    g = month();
    g.stops[0].weight = -0.1;
    g.stops[1].weight += 0.1;
    CHECK_THROWS_AS(g.validate(), Error);
}

TEST_CASE("generated logs satisfy the raw log invariants without cleaning") {
    const auto g = month();
    const auto raw = generate_event_log(g);
    REQUIRE(raw.size() > 1000);
    CHECK(check_event_log(raw, true).empty());
    for (std::size_t i = 1; i < raw.size(); ++i)
        REQUIRE(std::abs(raw.events[i].duration_s - seconds_between(raw.events[i - 1].timestamp, raw.events[i].timestamp)) <
                1e-9);
    for (const auto& e : raw.events) REQUIRE(g.schedule.contains(e.timestamp));
    CHECK(parse_event_log(csv(raw)).events == raw.events);
    const auto report = clean_event_log(raw, g.schedule);
    CHECK(report.duplicates_removed == 0);
    CHECK(report.schedule_removed == 0);
}

TEST_CASE("summary of one fourteen-hour day") {
    EventLog log;
    log.events.push_back(make_event(make_timestamp(2019, 5, 27, 6), MachineState::Run, 14 * 3600.0));
    log.events.push_back(make_event(make_timestamp(2019, 5, 27, 20), MachineState::Stop, 60));
    const auto s = summarize_log(log);
    CHECK(s.operating_days == 1);
    CHECK(s.daily_run_hours.mean == 14.0);
    CHECK(s.daily_run_hours.median == 14.0);
    CHECK(s.daily_run_hours.std == 0.0);
    CHECK(s.stop_counts[1] == 1);
    CHECK_THROWS_AS(summarize_log(EventLog{}), Error);
}

TEST_CASE("summary of a hand-built two-day log") {
    EventLog log;
    log.events.push_back(make_event(make_timestamp(2019, 5, 27, 8), MachineState::Run, 36000));
    log.events.push_back(make_event(make_timestamp(2019, 5, 27, 18), MachineState::Stop, 5));
    log.events.push_back(make_event(make_timestamp(2019, 5, 27, 18, 0, 5), MachineState::Run, 7 * 3600.0));
    log.events.push_back(make_event(make_timestamp(2019, 5, 28, 1, 0, 5), MachineState::Stop, 600));
    log.events.push_back(make_event(make_timestamp(2019, 5, 28, 1, 10, 5), MachineState::Run, 3600));
    log.events.push_back(make_event(make_timestamp(2019, 5, 28, 2, 10, 5), MachineState::Stop, 3000));
    log.events.push_back(make_event(make_timestamp(2019, 5, 28, 3, 0, 5), MachineState::Run, 20));
    auto last = make_event(make_timestamp(2019, 5, 28, 3, 0, 25), MachineState::Stop, 0);
    last.duration_unknown = true;
    log.events.push_back(last);

    const double day1 = (36000.0 + 6 * 3600.0 - 5.0) / 3600.0;
    const double day2 = (3605.0 + 3600.0 + 20.0) / 3600.0;
    const auto s = summarize_log(log);
    CHECK(s.operating_days == 2);
    CHECK(s.daily_run_hours.min == doctest::Approx(day2));
    CHECK(s.daily_run_hours.max == doctest::Approx(day1));
    CHECK(s.daily_run_hours.mean == doctest::Approx((day1 + day2) / 2));
    CHECK(s.daily_run_hours.median == doctest::Approx((day1 + day2) / 2));
    CHECK(s.daily_run_hours.std == doctest::Approx((day1 - day2) / std::sqrt(2.0)));
    CHECK(s.stop_counts == std::array<std::size_t, 4>{1, 0, 1, 1});
    CHECK(s.total_stops == 3);
    CHECK(s.mean_daily_stops == 1.5);
}

TEST_CASE("summary counts agree with per-event categorization") {
    const auto g = month();
    const auto cleaned = clean_event_log(generate_event_log(g), g.schedule).log;
    std::array<std::size_t, 4> counts{};
    for (const auto& e : cleaned.events)
        if (e.state == MachineState::Stop && !e.duration_unknown) ++counts[static_cast<int>(categorize_stop(e.duration_s))];
    CHECK(summarize_log(cleaned).stop_counts == counts);
}

TEST_CASE("default year lands in the calibrated range") {
    const GeneratorConfig g;
    const auto s = summarize_log(clean_event_log(generate_event_log(g), g.schedule).log);
    CHECK(s.daily_run_hours.mean >= 13.0);
    CHECK(s.daily_run_hours.mean <= 15.0);
    CHECK(s.daily_run_hours.max <= 20.0);
    CHECK(s.daily_run_hours.min >= 2.1);
}
