#include "stopcast/forecasting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace stopcast {

namespace {

double mean_of(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double median_of(std::span<const double> v) {
    std::vector<double> s(v.begin(), v.end());
    std::sort(s.begin(), s.end());
    const std::size_t n = s.size();
    return n % 2 ? s[n / 2] : 0.5 * (s[n / 2 - 1] + s[n / 2]);
}

bool is_moving(BenchmarkKind k) {
    return k == BenchmarkKind::MovingMean || k == BenchmarkKind::MovingMedian;
}

}  // namespace

std::string_view benchmark_name(BenchmarkKind k) {
    switch (k) {
        case BenchmarkKind::Naive: return "naive";
        case BenchmarkKind::StaticMean: return "static_mean";
        case BenchmarkKind::MovingMean: return "moving_mean";
        case BenchmarkKind::MovingMedian: return "moving_median";
    }
    return "?";
}

BenchmarkKind benchmark_from_name(std::string_view name) {
    for (auto k : kAllBenchmarks)
        if (benchmark_name(k) == name) return k;
    throw Error("unknown benchmark '" + std::string(name) + "'");
}

std::vector<double> benchmark_forecast(BenchmarkKind kind, std::span<const double> train,
                                       std::size_t horizon, std::size_t window) {
    if (train.empty()) throw Error("benchmark forecast needs a non-empty training series");
    if (horizon < 1) throw Error("horizon must be >= 1");
    if (is_moving(kind)) {
        if (window < 1) throw Error("moving window must be >= 1");
        if (window > train.size()) throw Error("moving window exceeds training length");
    }
    double value = 0.0;
    switch (kind) {
        case BenchmarkKind::Naive: value = train.back(); break;
        case BenchmarkKind::StaticMean: value = mean_of(train); break;
        case BenchmarkKind::MovingMean: value = mean_of(train.last(window)); break;
        case BenchmarkKind::MovingMedian: value = median_of(train.last(window)); break;
    }
    return std::vector<double>(horizon, value);
}

std::vector<double> in_sample_one_step_errors(BenchmarkKind kind, std::span<const double> train,
                                              std::size_t window) {
    std::size_t first = 1;
    if (is_moving(kind)) {
        if (window < 1) throw Error("moving window must be >= 1");
        first = window;
    }
    if (train.size() < first + 1)
        throw Error("insufficient history for in-sample " + std::string(benchmark_name(kind)) + " errors");
    std::vector<double> errors;
    errors.reserve(train.size() - first);
    double running = std::accumulate(train.begin(), train.begin() + static_cast<std::ptrdiff_t>(first), 0.0);
    for (std::size_t t = first; t < train.size(); ++t) {
        double pred = 0.0;
        switch (kind) {
            case BenchmarkKind::Naive: pred = train[t - 1]; break;
            case BenchmarkKind::StaticMean: pred = running / static_cast<double>(t); break;
            case BenchmarkKind::MovingMean: pred = mean_of(train.subspan(t - window, window)); break;
            case BenchmarkKind::MovingMedian: pred = median_of(train.subspan(t - window, window)); break;
        }
        errors.push_back(std::abs(train[t] - pred));
        running += train[t];
    }
    return errors;
}

// ---------------------------------------------------------------------------
// Holt-Winters

HoltWintersState holt_winters_initial_state(std::span<const double> train, std::size_t period) {
    if (period < 2) throw Error("seasonal period must be >= 2");
    if (train.size() < 2 * period)
        throw Error("Holt-Winters needs at least two full seasons (" + std::to_string(2 * period) +
                    " points), got " + std::to_string(train.size()));
    for (double y : train)
        if (!(y > 0.0) || !std::isfinite(y))
            throw Error("multiplicative seasonality requires positive series");

    const double m1 = mean_of(train.first(period));
    const double m2 = mean_of(train.subspan(period, period));
    HoltWintersState s;
    s.period = period;
    s.level = m1;
    s.trend = (m2 - m1) / static_cast<double>(period);
    s.seasonal.resize(period);
    for (std::size_t i = 0; i < period; ++i) s.seasonal[i] = train[i] / m1;
    const double norm = mean_of(s.seasonal);
    for (auto& x : s.seasonal) x /= norm;
    s.last_index = period - 1;
    return s;
}

HoltWintersState holt_winters_filter(std::span<const double> train, std::size_t period, double alpha,
                                     double beta, double gamma) {
    HoltWintersState s = holt_winters_initial_state(train, period);
    s.alpha = alpha;
    s.beta = beta;
    s.gamma = gamma;
    double sse = 0.0;
    for (std::size_t t = period; t < train.size(); ++t) {
        const std::size_t phase = t % period;
        const double y = train[t];
        const double season = s.seasonal[phase];
        const double pred = (s.level + s.trend) * season;
        sse += (y - pred) * (y - pred);
        const double level = alpha * y / season + (1.0 - alpha) * (s.level + s.trend);
        s.trend = beta * (level - s.level) + (1.0 - beta) * s.trend;
        s.level = level;
        s.seasonal[phase] = gamma * y / level + (1.0 - gamma) * season;
    }
    s.last_index = train.size() - 1;
    s.sse = sse;
    return s;
}

HoltWintersState fit_holt_winters(std::span<const double> train, std::size_t period) {
    holt_winters_initial_state(train, period);  // validates
    HoltWintersState best;
    best.sse = std::numeric_limits<double>::infinity();
    for (int a = 1; a <= 19; ++a)
        for (int b = 1; b <= 19; ++b)
            for (int g = 1; g <= 19; ++g) {
                auto s = holt_winters_filter(train, period, 0.05 * a, 0.05 * b, 0.05 * g);
                if (s.sse < best.sse) best = std::move(s);
            }
    if (!std::isfinite(best.sse)) throw Error("Holt-Winters fit diverged");
    return best;
}

std::vector<double> holt_winters_forecast(const HoltWintersState& state, std::size_t horizon) {
    std::vector<double> out(horizon);
    for (std::size_t k = 1; k <= horizon; ++k)
        out[k - 1] = (state.level + static_cast<double>(k) * state.trend) *
                     state.seasonal[(state.last_index + k) % state.period];
    return out;
}

// ---------------------------------------------------------------------------
// ARIMA

Differenced difference_series(std::span<const double> values, int d) {
    if (d < 0 || d > 2) throw Error("differencing order must be 0, 1 or 2");
    if (values.size() <= static_cast<std::size_t>(d)) throw Error("series too short to difference");
    Differenced out;
    out.values.assign(values.begin(), values.end());
    for (int k = 0; k < d; ++k) {
        out.heads.push_back(out.values.front());
        std::vector<double> next(out.values.size() - 1);
        for (std::size_t i = 0; i + 1 < out.values.size(); ++i) next[i] = out.values[i + 1] - out.values[i];
        out.values = std::move(next);
    }
    return out;
}

std::vector<double> integrate_series(const Differenced& diff) {
    std::vector<double> cur = diff.values;
    for (auto head = diff.heads.rbegin(); head != diff.heads.rend(); ++head) {
        std::vector<double> up(cur.size() + 1);
        up[0] = *head;
        for (std::size_t i = 0; i < cur.size(); ++i) up[i + 1] = up[i] + cur[i];
        cur = std::move(up);
    }
    return cur;
}

namespace {

std::vector<double> innovations(std::span<const double> x, std::span<const double> phi,
                                std::span<const double> theta) {
    const std::size_t p = phi.size(), q = theta.size();
    std::vector<double> e(x.size(), 0.0);
    for (std::size_t t = p; t < x.size(); ++t) {
        double v = x[t];
        for (std::size_t i = 1; i <= p; ++i) v -= phi[i - 1] * x[t - i];
        for (std::size_t j = 1; j <= q && j <= t; ++j) v -= theta[j - 1] * e[t - j];
        e[t] = v;
    }
    return e;
}

}  // namespace

double arima_css(std::span<const double> x, std::span<const double> phi, std::span<const double> theta) {
    const auto e = innovations(x, phi, theta);
    double css = 0.0;
    for (std::size_t t = phi.size(); t < e.size(); ++t) css += e[t] * e[t];
    return css;
}

ArimaParams fit_arima(std::span<const double> train, int p, int d, int q, const NelderMeadOptions& opts) {
    if (p < 0 || q < 0 || p > 5 || q > 5) throw Error("ARIMA orders must satisfy 0 <= p, q <= 5");
    if (d < 0 || d > 2) throw Error("ARIMA differencing order must be 0, 1 or 2");
    if (p + q < 1 && d == 0) throw Error("ARIMA needs p + q >= 1 when d = 0");
    const std::size_t need = 10 * static_cast<std::size_t>(p + q + 1);
    if (train.size() < need)
        throw Error("ARIMA(" + std::to_string(p) + "," + std::to_string(d) + "," + std::to_string(q) +
                    ") needs at least " + std::to_string(need) + " points, got " + std::to_string(train.size()));

    const auto diff = difference_series(train, d);
    ArimaParams params;
    params.p = p;
    params.d = d;
    params.q = q;
    params.intercept = mean_of(diff.values);
    std::vector<double> x(diff.values.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = diff.values[i] - params.intercept;

    const auto up = static_cast<std::size_t>(p);
    auto objective = [&](const std::vector<double>& v) {
        std::span<const double> all(v);
        return arima_css(x, all.first(up), all.subspan(up));
    };
    auto res = nelder_mead(objective, std::vector<double>(static_cast<std::size_t>(p + q), 0.0), opts);
    params.phi.assign(res.x.begin(), res.x.begin() + p);
    params.theta.assign(res.x.begin() + p, res.x.end());
    params.converged = res.converged;
    params.iterations = res.iterations;
    params.sigma2 = res.value / static_cast<double>(x.size() - up);
    return params;
}

std::vector<double> arima_forecast(const ArimaParams& params, std::span<const double> train,
                                   std::size_t horizon) {
    if (horizon < 1) throw Error("horizon must be >= 1");
    // Every differencing level of the history; the last value of each seeds integration.
    std::vector<std::vector<double>> levels{{train.begin(), train.end()}};
    for (int k = 0; k < params.d; ++k) levels.push_back(difference_series(levels.back(), 1).values);

    const auto& diffs = levels.back();
    std::vector<double> x(diffs.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = diffs[i] - params.intercept;
    auto e = innovations(x, params.phi, params.theta);

    const std::size_t p = params.phi.size(), q = params.theta.size();
    for (std::size_t k = 0; k < horizon; ++k) {
        const std::size_t t = x.size();
        double v = 0.0;
        for (std::size_t i = 1; i <= p && i <= t; ++i) v += params.phi[i - 1] * x[t - i];
        for (std::size_t j = 1; j <= q && j <= t; ++j) v += params.theta[j - 1] * e[t - j];
        x.push_back(v);
        e.push_back(0.0);
    }
    std::vector<double> out(x.end() - static_cast<std::ptrdiff_t>(horizon), x.end());
    for (auto& v : out) v += params.intercept;
    for (int k = params.d - 1; k >= 0; --k) {
        double prev = levels[static_cast<std::size_t>(k)].back();
        for (auto& v : out) {
            v += prev;
            prev = v;
        }
    }
    return out;
}

}  // namespace stopcast
