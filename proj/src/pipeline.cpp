#include "stopcast/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

namespace stopcast {

using nlohmann::ordered_json;

PreparedLog prepare(const PipelineConfig& cfg) {
    PreparedLog out;
    if (cfg.input.empty()) {
        out.raw = staged("generate", [&] {
            GeneratorConfig g = cfg.generator;
            g.seed = cfg.seed;
            return generate_event_log(g);
        });
    } else {
        out.raw = staged("load", [&] {
            std::ifstream in(cfg.input);
            if (!in) throw Error("cannot read event log " + cfg.input);
            return parse_event_log(in, cfg.input);
        });
    }
    out.cleaning = staged("clean", [&] { return clean_event_log(out.raw, cfg.schedule); });
    if (out.cleaning.log.empty()) throw Error("clean: no events survive the schedule filter");
    return out;
}

IntervalSeries interval_series(const EventLog& cleaned, std::int64_t width_s, const DateRange& range) {
    return staged("resample", [&] {
        auto s = drop_idle_intervals(resample(cleaned, width_s));
        if (range.from || range.to)
            s = slice_dates(s, range.from.value_or(Timestamp{INT64_MIN}), range.to.value_or(Timestamp{INT64_MAX}));
        if (s.empty()) throw Error("no intervals in the selected date range");
        return s;
    });
}

UnivariateSeries minor_stop_series(const IntervalSeries& series) {
    UnivariateSeries u;
    for (const auto& r : series.records) {
        u.dates.push_back(r.start);
        u.values.push_back(r.stop_sum(StoppageCategory::Minor));
    }
    return u;
}

// ---------------------------------------------------------------------------

namespace {

ordered_json hw_json(const HoltWintersState& s) {
    return {{"alpha", s.alpha}, {"beta", s.beta},         {"gamma", s.gamma},     {"period", s.period},
            {"level", s.level}, {"trend", s.trend},       {"seasonal", s.seasonal}, {"last_index", s.last_index},
            {"sse", s.sse}};
}

ordered_json arima_json(const ArimaParams& a) {
    return {{"order", {a.p, a.d, a.q}}, {"phi", a.phi},         {"theta", a.theta},
            {"intercept", a.intercept}, {"sigma2", a.sigma2},   {"converged", a.converged},
            {"iterations", a.iterations}};
}

void check_finite(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) throw Error("non-finite prediction");
}

std::optional<BenchmarkKind> benchmark_for(const std::string& id) {
    if (id == "Naive") return BenchmarkKind::Naive;
    if (id == "StaticMean") return BenchmarkKind::StaticMean;
    if (id == "MovingMean") return BenchmarkKind::MovingMean;
    if (id == "MovingMedian") return BenchmarkKind::MovingMedian;
    return std::nullopt;
}

template <typename Fit>
void attempt(ModelSet& set, const std::string& id, Fit&& fit) {
    try {
        auto [pred, state] = fit();
        check_finite(pred);
        set.predictions[id] = std::move(pred);
        set.fitted[id] = std::move(state);
    } catch (const std::exception& e) {
        set.failures[id] = e.what();
    }
}

MetricsReport score(const std::string& name, std::span<const double> actual, std::span<const double> pred,
                    const MaseScale& scale) {
    const auto pm = point_metrics(actual, pred);
    MetricsReport r;
    r.model = name;
    r.mae = pm.mae;
    r.rmse = pm.rmse;
    r.mape = pm.mape;
    r.n_points = pm.n;
    r.n_excluded_zero_actuals = pm.excluded_zero_actuals;
    for (const auto& [kind, errors] : scale.errors) r.mase[kind] = mase(pm.mae, errors);
    return r;
}

MaseScale mase_scale(std::span<const double> train, std::size_t window, std::map<std::string, std::string>& missing) {
    MaseScale s;
    s.window = window;
    for (auto kind : kAllBenchmarks) {
        const std::string name(benchmark_name(kind));
        try {
            auto errors = in_sample_one_step_errors(kind, train, window);
            double sum = 0.0;
            for (double e : errors) sum += e;
            if (!(sum > 0.0)) throw Error("degenerate benchmark (constant training series)");
            s.errors[kind] = std::move(errors);
        } catch (const Error& e) {
            missing[name] = e.what();
        }
    }
    return s;
}

void finish_category(CategoryResult& res, std::span<const double> train_values, const PipelineConfig& cfg) {
    const MaseScale scale = mase_scale(train_values, cfg.benchmark_window, res.mase_unavailable);
    std::vector<MetricsReport> reports;
    for (const auto& [id, pred] : res.models.predictions) {
        res.predictions[id] = pred;
        reports.push_back(score(id, res.actual, pred, scale));
    }
    if (res.models.ids.size() >= cfg.ensemble_min_size) {
        for (const auto& spec : enumerate_combinations(res.models.ids, cfg.ensemble_min_size)) {
            std::vector<std::vector<double>> members;
            bool complete = true;
            for (const auto& m : spec.members()) {
                auto it = res.models.predictions.find(m);
                if (it == res.models.predictions.end()) {
                    complete = false;
                    break;
                }
                members.push_back(it->second);
            }
            if (!complete) {
                res.excluded_ensembles.push_back(spec.name());
                continue;
            }
            auto pred = average_ensemble_forecast(members);
            reports.push_back(score(spec.name(), res.actual, pred, scale));
            res.predictions[spec.name()] = std::move(pred);
        }
    }
    if (reports.empty()) throw Error("every model failed");
    res.leaderboard = rank_leaderboard(std::move(reports), cfg.sort_key);
}

std::size_t train_rows(std::size_t n, double fraction) {
    const auto k = static_cast<std::size_t>(std::floor(static_cast<double>(n) * fraction));
    if (k == 0 || k >= n) throw Error("temporal split leaves an empty side");
    return k;
}

}  // namespace

ModelSet fit_forecasters(std::span<const double> train, std::size_t horizon, const PipelineConfig& cfg) {
    ModelSet set;
    set.ids = kForecasterIds;
    for (const auto& id : set.ids) {
        if (auto kind = benchmark_for(id)) {
            attempt(set, id, [&] {
                auto pred = benchmark_forecast(*kind, train, horizon, cfg.benchmark_window);
                ordered_json state = {{"benchmark", benchmark_name(*kind)}, {"window", cfg.benchmark_window},
                                      {"value", pred.front()}};
                return std::pair{std::move(pred), std::move(state)};
            });
        } else if (id == "HWAMS") {
            attempt(set, id, [&] {
                auto st = fit_holt_winters(train, cfg.hw_period);
                return std::pair{holt_winters_forecast(st, horizon), hw_json(st)};
            });
        } else if (id == "ARIMA") {
            attempt(set, id, [&] {
                auto params = fit_arima(train, cfg.arima_p, cfg.arima_d, cfg.arima_q);
                return std::pair{arima_forecast(params, train, horizon), arima_json(params)};
            });
        }
    }
    return set;
}

ModelSet fit_regressors(const FeatureMatrix& train, const FeatureMatrix& test, const PipelineConfig& cfg) {
    if (!train.target()) throw Error("training rows carry no target");
    const Matrix X = Matrix::from_features(train);
    const Matrix Xt = Matrix::from_features(test);
    const auto& y = train.target()->values;
    auto predict_all = [&](auto&& f) {
        std::vector<double> out(Xt.rows());
        for (std::size_t r = 0; r < Xt.rows(); ++r) out[r] = f(Xt.row(r));
        return out;
    };

    ModelSet set;
    set.ids = kRegressorIds;
    attempt(set, "DecisionTree", [&] {
        TreeParams p;
        p.max_depth = cfg.trees.max_depth;
        p.min_samples_leaf = cfg.trees.min_samples_leaf;
        p.seed = cfg.seed;
        auto tree = fit_cart(X, y, p);
        return std::pair{predict_all([&](auto x) { return tree.predict(x); }), ordered_json(tree.to_json())};
    });
    attempt(set, "ExtraTrees", [&] {
        ForestParams p;
        p.n_trees = cfg.trees.n_trees;
        p.mode = ForestMode::ExtraTrees;
        p.max_depth = cfg.trees.max_depth;
        p.min_samples_leaf = cfg.trees.min_samples_leaf;
        p.seed = cfg.seed;
        p.threads = cfg.trees.threads;
        auto forest = fit_forest(X, y, p);
        return std::pair{predict_all([&](auto x) { return predict_forest(forest, x); }),
                         ordered_json(forest.to_json())};
    });
    attempt(set, "GradientBoosting", [&] {
        BoostingParams p = cfg.boosting;
        p.seed = cfg.seed;
        auto model = fit_gradient_boosting(X, y, p);
        return std::pair{predict_all([&](auto x) { return predict_boosted(model, x); }),
                         ordered_json(model.to_json())};
    });
    return set;
}

CategoryResult evaluate_forecasting(const UnivariateSeries& series, const PipelineConfig& cfg) {
    CategoryResult res;
    res.category = "forecasting";
    const std::size_t n = series.size();
    res.n_train = staged("split", [&] { return train_rows(n, cfg.split_fraction); });
    const std::span<const double> all(series.values);
    const auto train = all.first(res.n_train);
    res.actual.assign(all.begin() + static_cast<std::ptrdiff_t>(res.n_train), all.end());
    res.test_dates.assign(series.dates.begin() + static_cast<std::ptrdiff_t>(res.n_train), series.dates.end());
    res.models = staged("fit", [&] { return fit_forecasters(train, res.actual.size(), cfg); });
    staged("evaluate", [&] { finish_category(res, train, cfg); });
    return res;
}

CategoryResult evaluate_regression(const FeatureMatrix& data, const PipelineConfig& cfg) {
    CategoryResult res;
    res.category = "regression";
    if (!data.target()) throw Error("split: feature matrix has no target");
    auto [train, test] = staged("split", [&] {
        train_rows(data.rows(), cfg.split_fraction);
        return temporal_split(data, cfg.split_fraction);
    });
    res.n_train = train.rows();
    res.actual = test.target()->values;
    res.test_dates = test.index();
    res.models = staged("fit", [&] { return fit_regressors(train, test, cfg); });
    staged("evaluate", [&] { finish_category(res, train.target()->values, cfg); });
    return res;
}

ForecastResult run_forecast_usecase(const PipelineConfig& cfg, const EventLog& cleaned) {
    const auto daily = interval_series(cleaned, cfg.forecast_width_s, cfg.forecast_range);
    ForecastResult out;
    out.forecasting = staged("forecasting", [&] { return evaluate_forecasting(minor_stop_series(daily), cfg); });
    const auto matrix = staged("features", [&] {
        return attach_regression_target(build_feature_matrix(daily, cleaned, cfg.features));
    });
    out.regression = staged("regression", [&] { return evaluate_regression(matrix, cfg); });
    return out;
}

// ---------------------------------------------------------------------------

ClassificationResult classify_matrix(const FeatureMatrix& labelled, const ClassificationRule& rule,
                                     const PipelineConfig& cfg) {
    if (!labelled.target()) throw Error("split: feature matrix has no target");
    auto [train, test] = staged("split", [&] {
        train_rows(labelled.rows(), cfg.split_fraction);
        return temporal_split(labelled, cfg.split_fraction);
    });
    ClassificationResult res;
    res.rule = rule;
    res.n_train = train.rows();
    res.n_test = test.rows();
    const auto& y = train.target()->values;
    for (double v : y) res.train_positive += v == 1.0;
    for (double v : test.target()->values) res.test_positive += v == 1.0;
    if (res.train_positive == 0 || res.train_positive == res.n_train)
        throw Error("fit: degenerate classification target");

    res.model = staged("fit", [&] {
        ForestParams p;
        p.n_trees = cfg.trees.n_trees;
        p.mode = ForestMode::BaggedRF;
        p.task = Task::Classification;
        p.max_depth = cfg.trees.max_depth;
        p.min_samples_leaf = cfg.trees.min_samples_leaf;
        p.seed = cfg.seed;
        p.threads = cfg.trees.threads;
        return fit_forest(Matrix::from_features(train), y, p);
    });
    staged("evaluate", [&] {
        const Matrix Xt = Matrix::from_features(test);
        std::vector<double> pred(Xt.rows());
        for (std::size_t r = 0; r < Xt.rows(); ++r) pred[r] = predict_forest(res.model, Xt.row(r));
        res.confusion = confusion(test.target()->values, pred);
        res.report = classification_report(res.confusion);
    });
    return res;
}

ClassificationResult run_classification_usecase(const PipelineConfig& cfg, const EventLog& cleaned,
                                                const ClassificationRule& rule) {
    const auto hourly = interval_series(cleaned, cfg.classification_width_s, cfg.classification_range);
    const auto labelled = staged("features", [&] {
        return attach_classification_target(build_feature_matrix(hourly, cleaned, cfg.features), rule);
    });
    return staged("classification", [&] { return classify_matrix(labelled, rule, cfg); });
}

// ---------------------------------------------------------------------------

std::string artifact_comment(const PipelineConfig& cfg) {
    return "# stopcast config_hash=" + config_hash(cfg) + " seed=" + std::to_string(cfg.seed) + "\n";
}

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace

void write_leaderboard_csv(const std::vector<MetricsReport>& rows, std::ostream& out) {
    out << "rank,name,mape,mae,rmse";
    for (auto k : kAllBenchmarks) out << ",mase_" << benchmark_name(k);
    out << '\n';
    std::size_t rank = 0;
    for (const auto& r : rows) {
        out << ++rank << ',' << r.model << ',' << (r.mape ? fmt(*r.mape) : "") << ',' << fmt(r.mae / 60.0) << ','
            << fmt(r.rmse / 60.0);
        for (auto k : kAllBenchmarks) {
            auto it = r.mase.find(k);
            out << ',' << (it == r.mase.end() ? "" : fmt(it->second));
        }
        out << '\n';
    }
}

void write_forecasts_csv(const ForecastResult& result, std::ostream& out) {
    out << "date,actual,forecast,model_id\n";
    for (const auto* cat : {&result.forecasting, &result.regression}) {
        for (const auto& row : cat->leaderboard) {
            const auto& pred = cat->predictions.at(row.model);
            for (std::size_t i = 0; i < pred.size(); ++i)
                out << format_date(cat->test_dates[i]) << ',' << fmt(cat->actual[i]) << ',' << fmt(pred[i]) << ','
                    << row.model << '\n';
        }
    }
}

ordered_json metrics_json(const MetricsReport& r) {
    ordered_json mase = ordered_json::object();
    for (auto k : {BenchmarkKind::Naive, BenchmarkKind::StaticMean, BenchmarkKind::MovingMean,
                   BenchmarkKind::MovingMedian}) {
        auto it = r.mase.find(k);
        mase[std::string(benchmark_name(k))] = it == r.mase.end() ? ordered_json(nullptr) : ordered_json(it->second);
    }
    return {{"model", r.model},
            {"mape", r.mape ? ordered_json(*r.mape) : ordered_json(nullptr)},
            {"mae", r.mae},
            {"rmse", r.rmse},
            {"mase", mase},
            {"n", r.n_points},
            {"excluded_zero_actuals", r.n_excluded_zero_actuals}};
}

namespace {

ordered_json category_json(const CategoryResult& c) {
    ordered_json results = ordered_json::array();
    for (const auto& r : c.leaderboard) results.push_back(metrics_json(r));
    ordered_json failures = ordered_json::object();
    for (const auto& [id, why] : c.models.failures) failures[id] = why;
    ordered_json unavailable = ordered_json::object();
    for (const auto& [k, why] : c.mase_unavailable) unavailable[k] = why;
    return {{"n_train", c.n_train},
            {"n_test", c.actual.size()},
            {"test_start", c.test_dates.empty() ? "" : format_date(c.test_dates.front())},
            {"test_end", c.test_dates.empty() ? "" : format_date(c.test_dates.back())},
            {"models", c.models.ids},
            {"failures", failures},
            {"excluded_ensembles", c.excluded_ensembles},
            {"mase_unavailable", unavailable},
            {"results", results}};
}

ordered_json class_json(const ClassMetrics& m) {
    return {{"precision", m.precision},
            {"recall", m.recall},
            {"f_measure", m.f_measure},
            {"precision_pct", round_percent(m.precision)},
            {"recall_pct", round_percent(m.recall)},
            {"f_measure_pct", round_percent(m.f_measure)},
            {"degenerate", m.degenerate}};
}

}  // namespace

ordered_json forecast_report_json(const ForecastResult& result, const PipelineConfig& cfg) {
    return {{"config_hash", config_hash(cfg)},
            {"seed", cfg.seed},
            {"units", "seconds"},
            {"sort_key", cfg.sort_key},
            {"mase_window", cfg.benchmark_window},
            {"forecasting", category_json(result.forecasting)},
            {"regression", category_json(result.regression)}};
}

ordered_json classification_report_json(const ClassificationResult& r, const PipelineConfig& cfg) {
    const auto& cm = r.confusion;
    const auto pct = [](std::size_t a, std::size_t n) { return n ? static_cast<double>(a) / static_cast<double>(n) : 0.0; };
    return {{"config_hash", config_hash(cfg)},
            {"seed", cfg.seed},
            {"rule", r.rule.name()},
            {"n_train", r.n_train},
            {"n_test", r.n_test},
            {"class_balance",
             {{"train_positive", r.train_positive},
              {"train_negative", r.n_train - r.train_positive},
              {"test_positive", r.test_positive},
              {"test_negative", r.n_test - r.test_positive},
              {"test_positive_share", pct(r.test_positive, r.n_test)}}},
            {"confusion", {{"tp", cm.tp}, {"fp", cm.fp}, {"fn", cm.fn}, {"tn", cm.tn}}},
            {"per_class", {{"alarm", class_json(r.report.alarm)}, {"ignore", class_json(r.report.ignore)}}},
            {"accuracy", r.report.accuracy},
            {"accuracy_pct", round_percent(r.report.accuracy)}};
}

ordered_json summary_json(const LogSummary& s) {
    const auto& d = s.daily_run_hours;
    ordered_json counts = ordered_json::object();
    for (auto c : kAllCategories) counts[std::string(category_name(c))] = s.stop_counts[static_cast<int>(c)];
    return {{"daily_run_hours",
             {{"min", d.min}, {"max", d.max}, {"mean", d.mean}, {"median", d.median}, {"std", d.std}}},
            {"operating_days", s.operating_days},
            {"stop_counts", counts},
            {"total_stops", s.total_stops},
            {"mean_daily_stops", s.mean_daily_stops}};
}

}  // namespace stopcast
