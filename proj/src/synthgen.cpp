#include "stopcast/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <string>

namespace stopcast {

double Random::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Random::normal() {
    // Box-Muller; 1 - u keeps the logarithm finite.
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double truncated_mass(const LogNormal& law, StoppageCategory c, double major_cap_s) {
    auto [lo, hi] = category_bounds(c);
    if (c == StoppageCategory::Major) hi = major_cap_s;
    const double a = lo > 0.0 ? normal_cdf((std::log(lo) - law.mu) / law.sigma) : 0.0;
    const double b = std::isfinite(hi) ? normal_cdf((std::log(hi) - law.mu) / law.sigma) : 1.0;
    return b - a;
}

}  // namespace

void GeneratorConfig::validate() const {
    if (!(start < end)) throw Error("generator span: start must precede end");
    if (schedule.empty()) throw Error("generator schedule must contain at least one window");
    if (!(run.sigma > 0.0) || !std::isfinite(run.mu)) throw Error("run law: sigma must be positive");
    double total = 0.0;
    for (auto c : kAllCategories) {
        const auto& comp = stops[static_cast<int>(c)];
        const std::string name(category_name(c));
        if (!(comp.weight >= 0.0) || !std::isfinite(comp.weight))
            throw Error("invalid mixture: negative weight for " + name);
        if (comp.weight == 0.0) continue;
        if (!(comp.law.sigma > 0.0) || !std::isfinite(comp.law.mu))
            throw Error("invalid mixture: bad log-normal parameters for " + name);
        if (truncated_mass(comp.law, c, major_cap_s) < 1e-4)
            throw Error("invalid mixture: " + name + " law puts almost no mass in its category range");
        total += comp.weight;
    }
    if (std::abs(total - 1.0) > 1e-9) throw Error("invalid mixture: weights must sum to 1");
    for (double m : weekday_multiplier)
        if (!(m > 0.0)) throw Error("weekday_multiplier entries must be positive");
    if (!(seasonal_amplitude >= 0.0 && seasonal_amplitude < 1.0))
        throw Error("seasonal_amplitude must lie in [0, 1)");
    if (seasonal_peak_day < 1 || seasonal_peak_day > 366) throw Error("seasonal_peak_day must lie in [1, 366]");
    if (!(daily_sigma >= 0.0)) throw Error("daily_sigma must be non-negative");
    if (!(major_cap_s > category_bounds(StoppageCategory::Major).first))
        throw Error("major_cap_s must exceed the major stop threshold");
}

namespace {

constexpr std::int64_t kShutdownLeadMs = 60 * kMsPerSecond;

class Simulator {
public:
    explicit Simulator(const GeneratorConfig& cfg) : cfg_(cfg), rng_(cfg.seed) {
        first_day_ = start_of_day(cfg.start);
        const auto days = (start_of_day(cfg.end).ms - first_day_.ms) / kMsPerDay + 1;
        day_factor_.reserve(static_cast<std::size_t>(days));
        for (std::int64_t i = 0; i < days; ++i) {
            const Timestamp day{first_day_.ms + i * kMsPerDay};
            const double season = 1.0 + cfg.seasonal_amplitude *
                                             std::cos(2.0 * std::numbers::pi *
                                                      (day_of_year(day) - cfg.seasonal_peak_day) / 365.25);
            const double noise = std::exp(cfg.daily_sigma * rng_.normal());
            day_factor_.push_back(cfg.weekday_multiplier[weekday(day)] * season * noise);
        }
        for (auto c : kAllCategories) {
            cum_weight_[static_cast<int>(c)] =
                (c == StoppageCategory::Micro ? 0.0 : cum_weight_[static_cast<int>(c) - 1]) +
                cfg.stops[static_cast<int>(c)].weight;
        }
    }

    EventLog run() {
        EventLog log;
        log.provenance = "synthetic seed=" + std::to_string(cfg_.seed);
        for (const auto& [b0, b1] : cfg_.schedule.blocks(cfg_.start, cfg_.end)) simulate_block(log, b0, b1);
        return log;
    }

private:
    void emit(EventLog& log, std::int64_t t, MachineState s) {
        const double raw = log.events.empty() ? 0.0 : static_cast<double>(t - log.events.back().timestamp.ms) / 1000.0;
        log.events.push_back(make_event(Timestamp{t}, s, raw));
    }

    std::int64_t draw_run_ms(std::int64_t t) {
        const auto day = static_cast<std::size_t>((t - first_day_.ms) / kMsPerDay);
        const double s = std::exp(cfg_.run.mu + cfg_.run.sigma * rng_.normal()) * day_factor_[day];
        return std::max<std::int64_t>(1, std::llround(s * 1000.0));
    }

    std::int64_t draw_stop_ms() {
        const double u = rng_.uniform() * cum_weight_[3];
        int k = 0;
        while (k < 3 && (u >= cum_weight_[k] || cfg_.stops[k].weight == 0.0)) ++k;
        const auto c = static_cast<StoppageCategory>(k);
        auto [lo, hi] = category_bounds(c);
        if (c == StoppageCategory::Major) hi = cfg_.major_cap_s;
        const auto& law = cfg_.stops[k].law;
        for (int attempt = 0; attempt < 1'000'000; ++attempt) {
            const double s = std::exp(law.mu + law.sigma * rng_.normal());
            const std::int64_t ms = std::llround(s * 1000.0);
            const double rounded = static_cast<double>(ms) / 1000.0;
            if (ms >= 1 && rounded >= lo && rounded < hi) return ms;
        }
        throw Error("invalid mixture: could not sample a " + std::string(category_name(c)) + " stop");
    }

    void simulate_block(EventLog& log, Timestamp b0, Timestamp b1) {
        const std::int64_t shutdown = b1.ms - kShutdownLeadMs;
        if (shutdown <= b0.ms) return;
        std::int64_t t = b0.ms;
        emit(log, t, MachineState::Run);
        while (true) {
            const std::int64_t run = draw_run_ms(t);
            if (t + run >= shutdown) {
                emit(log, shutdown, MachineState::Stop);
                return;
            }
            t += run;
            emit(log, t, MachineState::Stop);
            const std::int64_t stop = draw_stop_ms();
            if (t + stop >= shutdown) return;
            t += stop;
            emit(log, t, MachineState::Run);
        }
    }

    const GeneratorConfig& cfg_;
    Random rng_;
    Timestamp first_day_;
    std::vector<double> day_factor_;
    std::array<double, 4> cum_weight_{};
};

DistributionSummary describe(std::vector<double> v) {
    DistributionSummary d;
    if (v.empty()) return d;
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    d.min = v.front();
    d.max = v.back();
    d.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(n);
    d.median = n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    if (n > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - d.mean) * (x - d.mean);
        d.std = std::sqrt(ss / static_cast<double>(n - 1));
    }
    return d;
}

}  // namespace

EventLog generate_event_log(const GeneratorConfig& cfg) {
    cfg.validate();
    return Simulator(cfg).run();
}

LogSummary summarize_log(const EventLog& log) {
    if (log.empty()) throw Error("cannot summarize an empty log");
    std::map<std::int64_t, double> run_s;
    LogSummary s;
    for (const auto& e : log.events) {
        if (e.duration_unknown) continue;
        if (e.state == MachineState::Stop) {
            ++s.stop_counts[static_cast<int>(categorize_stop(e.duration_s))];
            ++s.total_stops;
            continue;
        }
        double t = static_cast<double>(e.timestamp.ms);
        const double end = t + e.duration_s * 1000.0;
        while (t < end) {
            const auto day = start_of_day(Timestamp{static_cast<std::int64_t>(std::floor(t))}).ms;
            const double piece_end = std::min(end, static_cast<double>(day + kMsPerDay));
            run_s[day] += (piece_end - t) / 1000.0;
            t = piece_end;
        }
    }
    std::vector<double> hours;
    for (const auto& [day, secs] : run_s)
        if (secs > 0.0) hours.push_back(secs / 3600.0);
    s.operating_days = hours.size();
    s.daily_run_hours = describe(std::move(hours));
    if (s.operating_days > 0)
        s.mean_daily_stops = static_cast<double>(s.total_stops) / static_cast<double>(s.operating_days);
    return s;
}

}  // namespace stopcast
