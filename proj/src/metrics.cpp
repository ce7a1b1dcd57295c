#include "stopcast/metrics.hpp"

#include <cmath>
#include <numeric>

namespace stopcast {

PointMetrics point_metrics(std::span<const double> actual, std::span<const double> forecast) {
    if (actual.size() != forecast.size()) throw Error("actual and forecast lengths differ");
    if (actual.empty()) throw Error("cannot score an empty forecast");
    PointMetrics m;
    m.n = actual.size();
    double abs_sum = 0.0, sq_sum = 0.0, pct_sum = 0.0;
    std::size_t pct_n = 0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double e = actual[i] - forecast[i];
        abs_sum += std::abs(e);
        sq_sum += e * e;
        if (actual[i] == 0.0) {
            ++m.excluded_zero_actuals;
        } else {
            pct_sum += std::abs(e / actual[i]);
            ++pct_n;
        }
    }
    const auto n = static_cast<double>(m.n);
    m.mae = abs_sum / n;
    m.rmse = std::sqrt(sq_sum / n);
    if (pct_n > 0) m.mape = 100.0 * pct_sum / static_cast<double>(pct_n);
    return m;
}

double mase(double test_mae, std::span<const double> errors) {
    if (errors.empty()) throw Error("MASE needs at least one in-sample benchmark error");
    const double scale = std::accumulate(errors.begin(), errors.end(), 0.0) / static_cast<double>(errors.size());
    if (!(scale > 0.0)) throw Error("degenerate benchmark (constant training series)");
    return test_mae / scale;
}

std::optional<double> MetricsReport::metric(const std::string& key) const {
    if (key == "mae") return mae;
    if (key == "rmse") return rmse;
    if (key == "mape") return mape;
    if (key.starts_with("mase_")) {
        auto it = mase.find(benchmark_from_name(key.substr(5)));
        if (it != mase.end()) return it->second;
    }
    return std::nullopt;
}

MaseScale MaseScale::from_training(std::span<const double> train, std::size_t window) {
    MaseScale s;
    s.window = window;
    for (auto k : kAllBenchmarks) s.errors[k] = in_sample_one_step_errors(k, train, window);
    return s;
}

MetricsReport evaluate_forecast(std::string model, std::span<const double> actual,
                                std::span<const double> forecast, const MaseScale& scale) {
    const auto pm = point_metrics(actual, forecast);
    MetricsReport r;
    r.model = std::move(model);
    r.mae = pm.mae;
    r.rmse = pm.rmse;
    r.mape = pm.mape;
    r.n_points = pm.n;
    r.n_excluded_zero_actuals = pm.excluded_zero_actuals;
    for (const auto& [kind, errors] : scale.errors) r.mase[kind] = mase(pm.mae, errors);
    return r;
}

ConfusionMatrix confusion(std::span<const double> actual, std::span<const double> predicted) {
    if (actual.size() != predicted.size()) throw Error("label sequences differ in length");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double a = actual[i], p = predicted[i];
        if ((a != 0.0 && a != 1.0) || (p != 0.0 && p != 1.0)) throw Error("labels must be 0 or 1");
        if (a == 1.0)
            ++(p == 1.0 ? cm.tp : cm.fn);
        else
            ++(p == 1.0 ? cm.fp : cm.tn);
    }
    return cm;
}

namespace {

ClassMetrics class_metrics(std::size_t hit, std::size_t false_pos, std::size_t miss) {
    ClassMetrics m;
    auto ratio = [&](std::size_t num, std::size_t den) {
        if (den == 0) {
            m.degenerate = true;
            return 0.0;
        }
        return static_cast<double>(num) / static_cast<double>(den);
    };
    m.precision = ratio(hit, hit + false_pos);
    m.recall = ratio(hit, hit + miss);
    if (m.precision + m.recall > 0.0)
        m.f_measure = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    else
        m.degenerate = true;
    return m;
}

}  // namespace

ClassificationReport classification_report(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw Error("empty confusion matrix");
    ClassificationReport r;
    r.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
    r.alarm = class_metrics(cm.tp, cm.fp, cm.fn);
    // For the ignore class the roles swap: tn are its hits, fn its false positives.
    r.ignore = class_metrics(cm.tn, cm.fn, cm.fp);
    return r;
}

int round_percent(double ratio) { return static_cast<int>(std::floor(ratio * 100.0 + 0.5)); }

}  // namespace stopcast
