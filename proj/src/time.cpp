#include "stopcast/time.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

namespace stopcast {

namespace {

namespace chr = std::chrono;

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

chr::sys_days to_days(Timestamp t) {
    return chr::sys_days{chr::days{floor_div(t.ms, kMsPerDay)}};
}

bool parse_int(std::string_view s, int& out) {
    if (s.empty()) return false;
    for (char c : s)
        if (c < '0' || c > '9') return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

bool valid_date(int y, int m, int d) {
    auto ymd = chr::year{y} / chr::month{static_cast<unsigned>(m)} / chr::day{static_cast<unsigned>(d)};
    return ymd.ok();
}

}  // namespace

Timestamp make_timestamp(int year, int month, int day, int hour, int minute, int second,
                         int millisecond) {
    auto ymd = chr::year{year} / chr::month{static_cast<unsigned>(month)} /
               chr::day{static_cast<unsigned>(day)};
    if (!ymd.ok()) throw Error("invalid calendar date");
    std::int64_t days = chr::sys_days{ymd}.time_since_epoch().count();
    return {days * kMsPerDay + hour * kMsPerHour + minute * kMsPerMinute +
            second * kMsPerSecond + millisecond};
}

CivilTime to_civil(Timestamp t) {
    auto days = to_days(t);
    chr::year_month_day ymd{days};
    std::int64_t rem = t.ms - days.time_since_epoch().count() * kMsPerDay;
    CivilTime c;
    c.year = static_cast<int>(ymd.year());
    c.month = static_cast<int>(static_cast<unsigned>(ymd.month()));
    c.day = static_cast<int>(static_cast<unsigned>(ymd.day()));
    c.hour = static_cast<int>(rem / kMsPerHour);
    rem %= kMsPerHour;
    c.minute = static_cast<int>(rem / kMsPerMinute);
    rem %= kMsPerMinute;
    c.second = static_cast<int>(rem / kMsPerSecond);
    c.millisecond = static_cast<int>(rem % kMsPerSecond);
    return c;
}

int weekday(Timestamp t) {
    // iso_encoding: Monday = 1 .. Sunday = 7
    return static_cast<int>(chr::weekday{to_days(t)}.iso_encoding()) - 1;
}

int day_of_year(Timestamp t) {
    auto days = to_days(t);
    chr::year_month_day ymd{days};
    auto jan1 = chr::sys_days{ymd.year() / chr::January / 1};
    return static_cast<int>((days - jan1).count()) + 1;
}

int iso_week(Timestamp t) {
    // The ISO week containing a date is the week of its Thursday.
    auto days = to_days(t);
    auto thursday = days + chr::days{3 - weekday(t)};
    chr::year_month_day ymd{thursday};
    auto jan1 = chr::sys_days{ymd.year() / chr::January / 1};
    return static_cast<int>((thursday - jan1).count()) / 7 + 1;
}

Timestamp floor_to(Timestamp t, std::int64_t width_ms) {
    return {floor_div(t.ms, width_ms) * width_ms};
}

Timestamp start_of_day(Timestamp t) { return floor_to(t, kMsPerDay); }

std::int64_t time_of_day_ms(Timestamp t) { return t.ms - start_of_day(t).ms; }

std::optional<Timestamp> parse_date(std::string_view s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    int y, m, d;
    if (!parse_int(s.substr(0, 4), y) || !parse_int(s.substr(5, 2), m) ||
        !parse_int(s.substr(8, 2), d))
        return std::nullopt;
    if (m < 1 || m > 12 || d < 1 || d > 31 || !valid_date(y, m, d)) return std::nullopt;
    return make_timestamp(y, m, d);
}

std::optional<Timestamp> parse_timestamp(std::string_view s) {
    if (s.size() < 19 || s[10] != ' ' || s[13] != ':' || s[16] != ':') return std::nullopt;
    auto date = parse_date(s.substr(0, 10));
    if (!date) return std::nullopt;
    int h, mi, sec, ms = 0;
    if (!parse_int(s.substr(11, 2), h) || !parse_int(s.substr(14, 2), mi) ||
        !parse_int(s.substr(17, 2), sec))
        return std::nullopt;
    if (h > 23 || mi > 59 || sec > 59) return std::nullopt;
    if (s.size() > 19) {
        auto frac = s.substr(20);
        if (s[19] != '.' || frac.empty() || frac.size() > 3 || !parse_int(frac, ms))
            return std::nullopt;
        for (std::size_t i = frac.size(); i < 3; ++i) ms *= 10;
    }
    return date->plus_ms(h * kMsPerHour + mi * kMsPerMinute + sec * kMsPerSecond + ms);
}

std::string format_timestamp(Timestamp t) {
    auto c = to_civil(t);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d %02d:%02d:%02d.%03d", c.year, c.month, c.day,
                  c.hour, c.minute, c.second, c.millisecond);
    return buf;
}

std::string format_timestamp_seconds(Timestamp t) {
    return format_timestamp(t).substr(0, 19);
}

std::string format_date(Timestamp t) { return format_timestamp(t).substr(0, 10); }

}  // namespace stopcast
