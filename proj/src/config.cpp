#include "stopcast/config.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace stopcast {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr const char* kWeekdays[] = {"mon", "tue", "wed", "thu", "fri", "sat", "sun"};

std::string clock_string(std::int64_t ms) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%02lld:%02lld", static_cast<long long>(ms / kMsPerHour),
                  static_cast<long long>(ms % kMsPerHour / kMsPerMinute));
    return buf;
}

std::int64_t parse_clock(const std::string& s, const std::string& field) {
    int h = -1, m = -1;
    char tail = 0;
    if (std::sscanf(s.c_str(), "%d:%d%c", &h, &m, &tail) != 2 || h < 0 || m < 0 || m > 59 || h > 24 ||
        (h == 24 && m != 0))
        throw Error(field + ": expected HH:MM, got '" + s + "'");
    return h * kMsPerHour + m * kMsPerMinute;
}

int parse_weekday(const std::string& s, const std::string& field) {
    for (int i = 0; i < 7; ++i)
        if (s == kWeekdays[i]) return i;
    throw Error(field + ": unknown weekday '" + s + "'");
}

StoppageCategory parse_category(const std::string& s, const std::string& field) {
    for (auto c : kAllCategories)
        if (category_name(c) == s) return c;
    throw Error(field + ": unknown stop category '" + s + "'");
}

CalendarField parse_calendar(const std::string& s, const std::string& field) {
    for (auto f : {CalendarField::DayOfWeek, CalendarField::DayOfMonth, CalendarField::Week, CalendarField::Hour})
        if (calendar_field_name(f) == s) return f;
    throw Error(field + ": unknown calendar field '" + s + "'");
}

Timestamp parse_date_field(const json& v, const std::string& field) {
    if (!v.is_string()) throw Error(field + ": expected a YYYY-MM-DD string");
    auto t = parse_date(v.get<std::string>());
    if (!t) throw Error(field + ": expected a YYYY-MM-DD string");
    return *t;
}

/// Walks one JSON object, handing each known key to its reader and rejecting the rest.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw Error("config section '" + display() + "' must be an object");
    }

    template <typename T>
    void read(const char* key, T& out) {
        seen_.insert(key);
        auto it = j_.find(key);
        if (it == j_.end()) return;
        try {
            out = it->template get<T>();
        } catch (const json::exception&) {
            throw Error(field(key) + ": wrong type");
        }
    }

    template <typename F>
    void with(const char* key, F&& f) {
        seen_.insert(key);
        auto it = j_.find(key);
        if (it != j_.end()) f(*it, field(key));
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw Error("unknown config key '" + field(it.key()) + "'");
    }

    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

private:
    std::string display() const { return path_.empty() ? "<root>" : path_; }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

ordered_json range_json(const DateRange& r) {
    ordered_json j = ordered_json::object();
    if (r.from) j["from"] = format_date(*r.from);
    if (r.to) j["to"] = format_date(*r.to);
    return j;
}

void read_range(const json& j, const std::string& path, DateRange& r) {
    Section s(j, path);
    s.with("from", [&](const json& v, const std::string& f) { r.from = parse_date_field(v, f); });
    s.with("to", [&](const json& v, const std::string& f) { r.to = parse_date_field(v, f); });
    s.finish();
}

OperatingSchedule read_schedule(const json& j, const std::string& path) {
    if (!j.is_array()) throw Error(path + ": expected a list of windows");
    std::vector<ScheduleWindow> windows;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string p = path + "[" + std::to_string(i) + "]";
        Section s(j[i], p);
        ScheduleWindow w;
        std::string day, start = "00:00", end = "24:00";
        s.read("weekday", day);
        s.read("start", start);
        s.read("end", end);
        s.finish();
        w.weekday = parse_weekday(day, p + ".weekday");
        w.start_ms = parse_clock(start, p + ".start");
        w.end_ms = parse_clock(end, p + ".end");
        windows.push_back(w);
    }
    try {
        return OperatingSchedule(std::move(windows));
    } catch (const Error& e) {
        throw Error(path + ": " + e.what());
    }
}

void read_generator(const json& j, GeneratorConfig& g) {
    Section s(j, "generator");
    s.with("start", [&](const json& v, const std::string& f) { g.start = parse_date_field(v, f); });
    s.with("end", [&](const json& v, const std::string& f) { g.end = parse_date_field(v, f); });
    s.with("run", [&](const json& v, const std::string& f) {
        Section r(v, f);
        r.read("mu", g.run.mu);
        r.read("sigma", g.run.sigma);
        r.finish();
    });
    s.with("stops", [&](const json& v, const std::string& f) {
        Section st(v, f);
        for (auto c : kAllCategories) {
            auto& comp = g.stops[static_cast<int>(c)];
            st.with(std::string(category_name(c)).c_str(), [&](const json& cv, const std::string& cf) {
                Section cs(cv, cf);
                cs.read("weight", comp.weight);
                cs.read("mu", comp.law.mu);
                cs.read("sigma", comp.law.sigma);
                cs.finish();
            });
        }
        st.finish();
    });
    s.read("weekday_multiplier", g.weekday_multiplier);
    s.read("seasonal_amplitude", g.seasonal_amplitude);
    s.read("seasonal_peak_day", g.seasonal_peak_day);
    s.read("daily_sigma", g.daily_sigma);
    s.read("major_cap_s", g.major_cap_s);
    s.finish();
}

}  // namespace

void PipelineConfig::validate() const {
    if (!(split_fraction > 0.0 && split_fraction < 1.0)) throw Error("split_fraction must lie in (0, 1)");
    if (!is_supported_width(forecast_width_s))
        throw Error("resample.forecast_width_s: unsupported interval width " + std::to_string(forecast_width_s));
    if (!is_supported_width(classification_width_s))
        throw Error("resample.classification_width_s: unsupported interval width " +
                    std::to_string(classification_width_s));
    for (const auto& [name, r] : {std::pair{"ranges.forecast", &forecast_range},
                                  std::pair{"ranges.classification", &classification_range}})
        if (r->from && r->to && !(*r->from < *r->to)) throw Error(std::string(name) + ": from must precede to");
    if (schedule.empty()) throw Error("schedule must contain at least one window");
    try {
        features.validate();
    } catch (const Error& e) {
        throw Error(std::string("features: ") + e.what());
    }
    if (benchmark_window < 1) throw Error("forecasting.benchmark_window must be at least 1");
    if (hw_period < 2) throw Error("forecasting.hw_period must be at least 2");
    if (arima_p < 0 || arima_q < 0 || arima_d < 0 || arima_d > 2)
        throw Error("forecasting.arima_order must be non-negative with d <= 2");
    if (trees.n_trees < 1) throw Error("trees.n_trees must be at least 1");
    if (trees.min_samples_leaf < 1) throw Error("trees.min_samples_leaf must be at least 1");
    if (boosting.n_stages < 1) throw Error("boosting.n_stages must be at least 1");
    if (!(boosting.learning_rate > 0.0 && boosting.learning_rate <= 1.0))
        throw Error("boosting.learning_rate must lie in (0, 1]");
    if (boosting.min_samples_leaf < 1) throw Error("boosting.min_samples_leaf must be at least 1");
    if (ensemble_min_size < 2) throw Error("ensembles.min_size must be at least 2");
    static const std::set<std::string> keys = {"mape",          "mae", "rmse", "mase_moving_mean", "mase_static_mean",
                                               "mase_moving_median", "mase_naive"};
    if (!keys.count(sort_key)) throw Error("ensembles.sort_key: unknown metric '" + sort_key + "'");
    if (rule.kind == ClassificationRule::Kind::DurationExceeds && !(rule.threshold_s >= 0.0))
        throw Error("classification.threshold_s must be non-negative");
    try {
        generator.validate();
    } catch (const Error& e) {
        throw Error(std::string("generator: ") + e.what());
    }
}

ordered_json config_to_json(const PipelineConfig& c) {
    ordered_json j;
    j["input"] = c.input;
    j["output"] = c.output;
    j["seed"] = c.seed;

    ordered_json sched = ordered_json::array();
    for (const auto& w : c.schedule.windows())
        sched.push_back({{"weekday", kWeekdays[w.weekday]},
                         {"start", clock_string(w.start_ms)},
                         {"end", clock_string(w.end_ms)}});
    j["schedule"] = sched;

    const auto& g = c.generator;
    ordered_json stops;
    for (auto cat : kAllCategories) {
        const auto& comp = g.stops[static_cast<int>(cat)];
        stops[std::string(category_name(cat))] = {
            {"weight", comp.weight}, {"mu", comp.law.mu}, {"sigma", comp.law.sigma}};
    }
    j["generator"] = {{"start", format_date(g.start)},
                      {"end", format_date(g.end)},
                      {"run", {{"mu", g.run.mu}, {"sigma", g.run.sigma}}},
                      {"stops", stops},
                      {"weekday_multiplier", g.weekday_multiplier},
                      {"seasonal_amplitude", g.seasonal_amplitude},
                      {"seasonal_peak_day", g.seasonal_peak_day},
                      {"daily_sigma", g.daily_sigma},
                      {"major_cap_s", g.major_cap_s}};

    j["resample"] = {{"forecast_width_s", c.forecast_width_s},
                     {"classification_width_s", c.classification_width_s}};
    j["ranges"] = {{"forecast", range_json(c.forecast_range)},
                   {"classification", range_json(c.classification_range)}};

    ordered_json cal = ordered_json::array();
    for (auto f : c.features.calendar) cal.push_back(std::string(calendar_field_name(f)));
    j["features"] = {{"lag_depth", c.features.lag_depth},
                     {"rolling_window", c.features.rolling_window},
                     {"mtb_category", std::string(category_name(c.features.mtb_category))},
                     {"calendar", cal},
                     {"time_since_major", c.features.time_since_major},
                     {"time_since_breakdown", c.features.time_since_breakdown}};
    j["split_fraction"] = c.split_fraction;
    j["forecasting"] = {{"benchmark_window", c.benchmark_window},
                        {"hw_period", c.hw_period},
                        {"arima_order", {c.arima_p, c.arima_d, c.arima_q}}};
    j["trees"] = {{"n_trees", c.trees.n_trees},
                  {"max_depth", c.trees.max_depth},
                  {"min_samples_leaf", c.trees.min_samples_leaf},
                  {"threads", c.trees.threads}};
    j["boosting"] = {{"n_stages", c.boosting.n_stages},
                     {"learning_rate", c.boosting.learning_rate},
                     {"max_depth", c.boosting.max_depth},
                     {"min_samples_leaf", c.boosting.min_samples_leaf}};
    j["ensembles"] = {{"min_size", c.ensemble_min_size}, {"sort_key", c.sort_key}};
    j["classification"] = {
        {"rule", c.rule.kind == ClassificationRule::Kind::DurationExceeds ? "duration_exceeds" : "breakdown_occurs"},
        {"threshold_s", c.rule.threshold_s}};
    return j;
}

PipelineConfig config_from_json(const json& j) {
    PipelineConfig c;
    Section root(j, "");
    root.read("input", c.input);
    root.read("output", c.output);
    root.read("seed", c.seed);
    root.with("schedule", [&](const json& v, const std::string& f) { c.schedule = read_schedule(v, f); });
    root.with("generator", [&](const json& v, const std::string&) { read_generator(v, c.generator); });
    root.with("resample", [&](const json& v, const std::string& f) {
        Section s(v, f);
        s.read("forecast_width_s", c.forecast_width_s);
        s.read("classification_width_s", c.classification_width_s);
        s.finish();
    });
    root.with("ranges", [&](const json& v, const std::string& f) {
        Section s(v, f);
        s.with("forecast", [&](const json& rv, const std::string& rf) { read_range(rv, rf, c.forecast_range); });
        s.with("classification",
               [&](const json& rv, const std::string& rf) { read_range(rv, rf, c.classification_range); });
        s.finish();
    });
    root.with("features", [&](const json& v, const std::string& f) {
        Section s(v, f);
        s.read("lag_depth", c.features.lag_depth);
        s.read("rolling_window", c.features.rolling_window);
        s.with("mtb_category", [&](const json& cv, const std::string& cf) {
            c.features.mtb_category = parse_category(cv.is_string() ? cv.get<std::string>() : "", cf);
        });
        s.with("calendar", [&](const json& cv, const std::string& cf) {
            if (!cv.is_array()) throw Error(cf + ": expected a list");
            c.features.calendar.clear();
            for (const auto& e : cv)
                c.features.calendar.push_back(parse_calendar(e.is_string() ? e.get<std::string>() : "", cf));
        });
        s.read("time_since_major", c.features.time_since_major);
        s.read("time_since_breakdown", c.features.time_since_breakdown);
        s.finish();
    });
    root.read("split_fraction", c.split_fraction);
    root.with("forecasting", [&](const json& v, const std::string& f) {
        Section s(v, f);
        s.read("benchmark_window", c.benchmark_window);
        s.read("hw_period", c.hw_period);
        s.with("arima_order", [&](const json& ov, const std::string& of) {
            if (!ov.is_array() || ov.size() != 3 || !ov[0].is_number_integer() || !ov[1].is_number_integer() ||
                !ov[2].is_number_integer())
                throw Error(of + ": expected [p, d, q]");
            c.arima_p = ov[0].get<int>();
            c.arima_d = ov[1].get<int>();
            c.arima_q = ov[2].get<int>();
        });
        s.finish();
    });
    root.with("trees", [&](const json& v, const std::string& f) {
        Section s(v, f);
        s.read("n_trees", c.trees.n_trees);
        s.read("max_depth", c.trees.max_depth);
        s.read("min_samples_leaf", c.trees.min_samples_leaf);
        s.read("threads", c.trees.threads);
        s.finish();
    });
    root.with("boosting", [&](const json& v, const std::string& f) {
        Section s(v, f);
        s.read("n_stages", c.boosting.n_stages);
        s.read("learning_rate", c.boosting.learning_rate);
        s.read("max_depth", c.boosting.max_depth);
        s.read("min_samples_leaf", c.boosting.min_samples_leaf);
        s.finish();
    });
    root.with("ensembles", [&](const json& v, const std::string& f) {
        Section s(v, f);
        s.read("min_size", c.ensemble_min_size);
        s.read("sort_key", c.sort_key);
        s.finish();
    });
    root.with("classification", [&](const json& v, const std::string& f) {
        Section s(v, f);
        std::string rule = "duration_exceeds";
        s.read("rule", rule);
        s.read("threshold_s", c.rule.threshold_s);
        s.finish();
        if (rule == "duration_exceeds")
            c.rule.kind = ClassificationRule::Kind::DurationExceeds;
        else if (rule == "breakdown_occurs")
            c.rule.kind = ClassificationRule::Kind::BreakdownOccurs;
        else
            throw Error(f + ".rule: expected duration_exceeds or breakdown_occurs");
    });
    root.finish();
    c.validate();
    return c;
}

PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read config file " + path);
    json j;
    try {
        j = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw Error("config " + path + ": " + e.what());
    }
    return config_from_json(j);
}

void save_config(const PipelineConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write config file " + path);
    out << config_to_json(cfg).dump(2) << '\n';
}

std::string config_hash(const PipelineConfig& cfg) {
    auto j = config_to_json(cfg);
    j.erase("output");
    const std::string text = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void apply_env_overrides(PipelineConfig& cfg) {
    if (const char* dir = std::getenv("STOPCAST_OUTPUT_DIR"); dir && *dir) cfg.output = dir;
    if (const char* seed = std::getenv("STOPCAST_SEED"); seed && *seed) {
        std::uint64_t v = 0;
        const char* end = seed + std::char_traits<char>::length(seed);
        auto [p, ec] = std::from_chars(seed, end, v);
        if (ec != std::errc{} || p != end) throw Error("STOPCAST_SEED must be a non-negative integer");
        cfg.seed = v;
    }
}

}  // namespace stopcast
