#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "stopcast/config.hpp"
#include "stopcast/ensembles.hpp"
#include "stopcast/metrics.hpp"

namespace stopcast {

/// Runs `f`, prefixing any Error it throws with the stage name.
template <typename F>
auto staged(const char* stage, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const Error& e) {
        const std::string what = e.what();
        if (what.starts_with(std::string(stage) + ":")) throw;
        throw Error(std::string(stage) + ": " + what);
    }
}

struct PreparedLog {
    EventLog raw;
    CleaningReport cleaning;
};

/// Reads cfg.input, or synthesizes a log when it is empty, then cleans it.
PreparedLog prepare(const PipelineConfig& cfg);

/// Resample, drop idle intervals, restrict to `range`.
IntervalSeries interval_series(const EventLog& cleaned, std::int64_t width_s, const DateRange& range);

/// sum_minor_stop per interval.
UnivariateSeries minor_stop_series(const IntervalSeries& series);

// ---------------------------------------------------------------------------

/// Fitted members of one model category with their test-window predictions.
struct ModelSet {
    std::vector<std::string> ids;  // every attempted model, sorted
    std::map<std::string, std::vector<double>> predictions;
    std::map<std::string, std::string> failures;
    /// Serialized fitted state per successful model.
    nlohmann::ordered_json fitted = nlohmann::ordered_json::object();
};

inline const std::vector<std::string> kForecasterIds = {"ARIMA",      "HWAMS", "MovingMean",
                                                        "MovingMedian", "Naive", "StaticMean"};
inline const std::vector<std::string> kRegressorIds = {"DecisionTree", "ExtraTrees", "GradientBoosting"};

/// Fits every forecaster on `train` and forecasts `horizon` steps past its end.
ModelSet fit_forecasters(std::span<const double> train, std::size_t horizon, const PipelineConfig& cfg);

/// Fits every tree regressor on the train rows and predicts the test rows.
ModelSet fit_regressors(const FeatureMatrix& train, const FeatureMatrix& test, const PipelineConfig& cfg);

/// One model category evaluated on its test window.
struct CategoryResult {
    std::string category;
    std::size_t n_train = 0;
    std::vector<Timestamp> test_dates;
    std::vector<double> actual;
    ModelSet models;
    /// Predictions of individual models and ensembles, keyed by canonical name.
    std::map<std::string, std::vector<double>> predictions;
    /// Ensembles dropped because a member failed.
    std::vector<std::string> excluded_ensembles;
    /// Benchmarks whose in-sample errors could not be formed, with the reason.
    std::map<std::string, std::string> mase_unavailable;
    /// Individual models and ensembles ranked by the configured key.
    std::vector<MetricsReport> leaderboard;
};

/// Temporal split of the daily series, every forecaster, their ensembles, metrics.
CategoryResult evaluate_forecasting(const UnivariateSeries& series, const PipelineConfig& cfg);

/// Temporal split of a feature matrix carrying the next-interval regression target.
CategoryResult evaluate_regression(const FeatureMatrix& data, const PipelineConfig& cfg);

struct ForecastResult {
    CategoryResult forecasting;
    CategoryResult regression;
};

/// Daily resample, both model categories, ensembles and leaderboards.
ForecastResult run_forecast_usecase(const PipelineConfig& cfg, const EventLog& cleaned);

// ---------------------------------------------------------------------------

struct ClassificationResult {
    ClassificationRule rule;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    std::size_t train_positive = 0;
    std::size_t test_positive = 0;
    ConfusionMatrix confusion;
    ClassificationReport report;
    ForestModel model;
};

/// Random forest on a labelled feature matrix after a temporal split.
ClassificationResult classify_matrix(const FeatureMatrix& labelled, const ClassificationRule& rule,
                                     const PipelineConfig& cfg);

/// Hourly resample, features, labels from `rule`, random forest, confusion matrix.
ClassificationResult run_classification_usecase(const PipelineConfig& cfg, const EventLog& cleaned,
                                                const ClassificationRule& rule);

// ---------------------------------------------------------------------------
// Artifacts

/// `# stopcast config_hash=<hash> seed=<seed>` comment line for CSV artifacts.
std::string artifact_comment(const PipelineConfig& cfg);

/// MAE and RMSE in minutes, MASE for each benchmark; missing values are left empty.
void write_leaderboard_csv(const std::vector<MetricsReport>& rows, std::ostream& out);
/// `date,actual,forecast,model_id` for every model and ensemble of both categories.
void write_forecasts_csv(const ForecastResult& result, std::ostream& out);

nlohmann::ordered_json metrics_json(const MetricsReport& r);
nlohmann::ordered_json forecast_report_json(const ForecastResult& result, const PipelineConfig& cfg);
nlohmann::ordered_json classification_report_json(const ClassificationResult& result, const PipelineConfig& cfg);
nlohmann::ordered_json summary_json(const LogSummary& s);

}  // namespace stopcast
