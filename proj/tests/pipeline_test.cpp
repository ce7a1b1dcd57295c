#include <doctest.h>

#include <sstream>

#include "stopcast/pipeline.hpp"

using namespace stopcast;

namespace {

PipelineConfig small_config() {
    PipelineConfig cfg;
    cfg.generator.start = make_timestamp(2019, 3, 1);
    cfg.generator.end = make_timestamp(2019, 6, 1);
    cfg.trees.n_trees = 15;
    cfg.trees.max_depth = 8;
    cfg.boosting.n_stages = 30;
    return cfg;
}

const EventLog& small_log() {
    static const EventLog log = prepare(small_config()).cleaning.log;
    return log;
}

/// Hourly RUN with two-second stops: no hour ever accumulates minor stop time.
EventLog all_run_log(int days) {
    EventLog log;
    for (int h = 0; h < days * 24; ++h) {
        const auto t = make_timestamp(2019, 5, 6).plus_ms(h * kMsPerHour);
        log.events.push_back(make_event(t, MachineState::Run, 3598));
        log.events.push_back(make_event(t.plus_ms(3598 * 1000), MachineState::Stop, 2));
    }
    return log;
}

}  // namespace

TEST_CASE("forecast use case enumerates every model and ensemble") {
    const auto cfg = small_config();
    const auto r = run_forecast_usecase(cfg, small_log());
    CHECK(r.forecasting.models.failures.empty());
    CHECK(r.forecasting.leaderboard.size() == 6 + 57);
    CHECK(r.regression.models.failures.empty());
    CHECK(r.regression.leaderboard.size() == 3 + 4);
    CHECK(r.forecasting.actual.size() == r.forecasting.test_dates.size());
    for (const auto& row : r.forecasting.leaderboard) {
        CHECK(row.n_points == r.forecasting.actual.size());
        CHECK(row.mase.size() == 4);
    }
    for (std::size_t i = 1; i < r.forecasting.leaderboard.size(); ++i)
        CHECK(*r.forecasting.leaderboard[i - 1].mape <= *r.forecasting.leaderboard[i].mape);
}

TEST_CASE("reruns are byte identical") {
    const auto cfg = small_config();
    std::ostringstream a, b, fa, fb;
    const auto r1 = run_forecast_usecase(cfg, small_log());
    const auto r2 = run_forecast_usecase(cfg, small_log());
    write_leaderboard_csv(r1.forecasting.leaderboard, a);
    write_leaderboard_csv(r2.forecasting.leaderboard, b);
    CHECK(a.str() == b.str());
    write_forecasts_csv(r1, fa);
    write_forecasts_csv(r2, fb);
    CHECK(fa.str() == fb.str());
    CHECK(forecast_report_json(r1, cfg).dump() == forecast_report_json(r2, cfg).dump());
    CHECK(r1.regression.models.fitted == r2.regression.models.fitted);
    CHECK(prepare(cfg).raw == prepare(cfg).raw);
}

TEST_CASE("poisoned test values leave every fitted model unchanged") {
    const auto cfg = small_config();
    const auto daily = interval_series(small_log(), cfg.forecast_width_s, cfg.forecast_range);

    auto series = minor_stop_series(daily);
    const auto clean_fit = evaluate_forecasting(series, cfg);
    for (std::size_t i = clean_fit.n_train; i < series.size(); ++i) series.values[i] = 1e9 + static_cast<double>(i);
    const auto poisoned_fit = evaluate_forecasting(series, cfg);
    CHECK(clean_fit.models.fitted.dump() == poisoned_fit.models.fitted.dump());
    for (const auto& [id, pred] : clean_fit.models.predictions) CHECK(poisoned_fit.models.predictions.at(id) == pred);

    auto matrix = attach_regression_target(build_feature_matrix(daily, small_log(), cfg.features));
    const auto clean_reg = evaluate_regression(matrix, cfg);
    for (std::size_t r = clean_reg.n_train; r < matrix.rows(); ++r) matrix.set_target_value(r, -1e9);
    const auto poisoned_reg = evaluate_regression(matrix, cfg);
    CHECK(clean_reg.models.fitted.dump() == poisoned_reg.models.fitted.dump());

    const auto hourly = interval_series(small_log(), cfg.classification_width_s, cfg.classification_range);
    auto labelled =
        attach_classification_target(build_feature_matrix(hourly, small_log(), cfg.features), cfg.rule);
    const auto clean_cls = classify_matrix(labelled, cfg.rule, cfg);
    for (std::size_t r = clean_cls.n_train; r < labelled.rows(); ++r)
        labelled.set_target_value(r, 1.0 - labelled.target()->values[r]);
    const auto poisoned_cls = classify_matrix(labelled, cfg.rule, cfg);
    CHECK(clean_cls.model == poisoned_cls.model);
}

TEST_CASE("a ten-day series reports the failures and keeps the rest") {
    const auto cfg = small_config();
    UnivariateSeries s;
    for (int d = 0; d < 10; ++d) {
        s.dates.push_back(make_timestamp(2019, 5, 1).plus_ms(d * kMsPerDay));
        s.values.push_back(3000.0 + 100.0 * (d % 3));
    }
    const auto r = evaluate_forecasting(s, cfg);
    REQUIRE(r.models.failures.count("HWAMS") == 1);
    CHECK(r.models.failures.at("HWAMS").find("two full seasons") != std::string::npos);
    CHECK(r.models.failures.count("ARIMA") == 1);
    CHECK(r.models.predictions.count("Naive") == 1);
    CHECK(r.models.predictions.count("MovingMean") == 1);
    for (const auto& name : r.excluded_ensembles)
        CHECK((name.find("HWAMS") != std::string::npos || name.find("ARIMA") != std::string::npos));
    for (const auto& row : r.leaderboard) {
        CHECK(row.model.find("HWAMS") == std::string::npos);
        CHECK(row.model.find("ARIMA") == std::string::npos);
    }
    // 4 benchmarks and their 11 ensembles survive.
    CHECK(r.leaderboard.size() == 15);
    CHECK(r.excluded_ensembles.size() == 57 - 11);

    PipelineConfig bad = cfg;
    bad.split_fraction = 0.05;
    try {
        evaluate_forecasting(s, bad);
        FAIL("expected a split error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).starts_with("split: "));
    }
}

TEST_CASE("stage errors carry the stage name") {
    PipelineConfig cfg;
    cfg.input = "/nonexistent/events.csv";
    try {
        prepare(cfg);
        FAIL("expected a load error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).starts_with("load: "));
    }
    EventLog tiny;
    for (int d = 0; d < 3; ++d) {
        tiny.events.push_back(make_event(make_timestamp(2019, 5, 6 + d, 8), MachineState::Run, 600));
        tiny.events.push_back(make_event(make_timestamp(2019, 5, 6 + d, 8, 10), MachineState::Stop, 60));
    }
    try {
        run_forecast_usecase(PipelineConfig{}, tiny);
        FAIL("expected a stage error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).starts_with("features: "));
    }
}

TEST_CASE("a log without minor stop time has a degenerate target") {
    PipelineConfig cfg;
    cfg.trees.n_trees = 5;
    CHECK_THROWS_WITH_AS(run_classification_usecase(cfg, all_run_log(12), ClassificationRule::duration_exceeds()),
                         "classification: fit: degenerate classification target", Error);
}

TEST_CASE("held-out labels follow the strict duration rule") {
    const auto cfg = small_config();
    const auto hourly = interval_series(small_log(), cfg.classification_width_s, cfg.classification_range);
    const auto features = build_feature_matrix(hourly, small_log(), cfg.features);
    const auto labelled = attach_classification_target(features, ClassificationRule::duration_exceeds(600));
    auto [train, test] = temporal_split(labelled, cfg.split_fraction);
    const auto minor = features.column(kSumMinor);
    std::size_t positives = 0;
    for (std::size_t r = 0; r < test.rows(); ++r) {
        const std::size_t row = train.rows() + r;
        const double expected = minor[row + 1] > 600.0 ? 1.0 : 0.0;
        REQUIRE(test.target()->values[r] == expected);
        positives += expected == 1.0;
    }
    const auto result = run_classification_usecase(cfg, small_log(), ClassificationRule::duration_exceeds(600));
    CHECK(result.n_test == test.rows());
    CHECK(result.test_positive == positives);
    CHECK(result.confusion.total() == test.rows());
    const auto j = classification_report_json(result, cfg);
    CHECK(j["rule"] == "duration_exceeds");
    CHECK(j["confusion"]["tp"].get<std::size_t>() == result.confusion.tp);
}

TEST_CASE("artifacts carry the config hash and seed") {
    PipelineConfig cfg;
    cfg.seed = 5;
    const auto c = artifact_comment(cfg);
    CHECK(c == "# stopcast config_hash=" + config_hash(cfg) + " seed=5\n");

    MetricsReport r;
    r.model = "Naive";
    r.mae = 120;
    r.rmse = 180;
    r.mape = 12.5;
    r.mase[BenchmarkKind::Naive] = 0.5;
    std::ostringstream out;
    write_leaderboard_csv({r}, out);
    CHECK(out.str() ==
          "rank,name,mape,mae,rmse,mase_moving_mean,mase_static_mean,mase_moving_median,mase_naive\n"
          "1,Naive,12.500000,2.000000,3.000000,,,,0.500000\n");
    const auto j = metrics_json(r);
    CHECK(j["mae"] == 120.0);
    CHECK(j["mase"]["naive"] == 0.5);
    CHECK(j["mase"]["static_mean"].is_null());
}
