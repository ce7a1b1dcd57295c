#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stopcast/forecasting.hpp"

namespace stopcast {

struct PointMetrics {
    double mae = 0.0;
    double rmse = 0.0;
    /// Percent; empty when every actual is zero.
    std::optional<double> mape;
    std::size_t n = 0;
    std::size_t excluded_zero_actuals = 0;
};

/// MAE, RMSE and MAPE. Points with a zero actual are left out of MAPE and counted.
PointMetrics point_metrics(std::span<const double> actual, std::span<const double> forecast);

/// Test MAE divided by the mean in-sample one-step error of a benchmark.
double mase(double test_mae, std::span<const double> benchmark_in_sample_errors);

/// Evaluation of one model or ensemble on the test window.
struct MetricsReport {
    std::string model;
    double mae = 0.0;
    double rmse = 0.0;
    std::optional<double> mape;
    std::map<BenchmarkKind, double> mase;
    std::size_t n_points = 0;
    std::size_t n_excluded_zero_actuals = 0;

    /// Looks up "mae", "rmse", "mape" or "mase_<benchmark>". Empty when absent.
    std::optional<double> metric(const std::string& key) const;
};

/// In-sample benchmark errors computed once per training series and reused for every model.
struct MaseScale {
    std::map<BenchmarkKind, std::vector<double>> errors;
    std::size_t window = 7;

    static MaseScale from_training(std::span<const double> train, std::size_t window);
};

MetricsReport evaluate_forecast(std::string model, std::span<const double> actual,
                                std::span<const double> forecast, const MaseScale& scale);

// ---------------------------------------------------------------------------
// Classification

struct ConfusionMatrix {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t tn = 0;

    std::size_t total() const { return tp + fp + fn + tn; }
    bool operator==(const ConfusionMatrix&) const = default;
};

/// Labels are 1 = alarm (positive) and 0 = ignore.
ConfusionMatrix confusion(std::span<const double> actual, std::span<const double> predicted);

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f_measure = 0.0;
    /// Set when a ratio had a zero denominator and was reported as 0.
    bool degenerate = false;
};

struct ClassificationReport {
    double accuracy = 0.0;
    ClassMetrics alarm;
    ClassMetrics ignore;
};

ClassificationReport classification_report(const ConfusionMatrix& cm);

/// Ratio as an integer percent, rounded half up.
int round_percent(double ratio);

}  // namespace stopcast
