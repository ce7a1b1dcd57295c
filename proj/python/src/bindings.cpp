#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "stopcast/pipeline.hpp"

namespace py = pybind11;
using namespace stopcast;
using nlohmann::json;

namespace {

py::object to_py(const nlohmann::ordered_json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

PipelineConfig config_of(const py::object& obj) {
    if (obj.is_none()) return PipelineConfig{};
    const std::string text = py::str(py::module_::import("json").attr("dumps")(obj));
    return config_from_json(json::parse(text));
}

std::string csv_of(const EventLog& log) {
    std::ostringstream out;
    write_event_log(log, out);
    return out.str();
}

Matrix matrix_of(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw Error("feature matrix has no rows");
    const std::size_t cols = rows.front().size();
    std::vector<double> data;
    data.reserve(rows.size() * cols);
    for (const auto& r : rows) {
        if (r.size() != cols) throw Error("feature rows differ in length");
        data.insert(data.end(), r.begin(), r.end());
    }
    return Matrix(rows.size(), cols, std::move(data));
}

BenchmarkKind benchmark_of(const std::string& name) { return benchmark_from_name(name); }

py::dict columns_of(const FeatureMatrix& m) {
    py::dict out;
    std::vector<std::string> stamps;
    for (auto t : m.index()) stamps.push_back(format_timestamp_seconds(t));
    out["timestamp"] = stamps;
    for (std::size_t c = 0; c < m.cols(); ++c) {
        auto col = m.column(c);
        out[py::str(m.names()[c])] = std::vector<double>(col.begin(), col.end());
    }
    if (m.target()) out[py::str(m.target()->name)] = m.target()->values;
    return out;
}

ClassificationRule rule_of(const std::string& name, double threshold_s) {
    if (name == "duration_exceeds") return ClassificationRule::duration_exceeds(threshold_s);
    if (name == "breakdown_occurs") return ClassificationRule::breakdown_occurs();
    throw Error("unknown rule '" + name + "'");
}

EventLog cleaned_or_prepared(const PipelineConfig& cfg, const std::optional<EventLog>& log) {
    if (log) return clean_event_log(*log, cfg.schedule).log;
    return prepare(cfg).cleaning.log;
}

}  // namespace

PYBIND11_MODULE(_stopcast, m) {
    m.doc() = "Machine stoppage forecasting and classification from RUN/STOP event logs.";
    py::register_exception<Error>(m, "StopcastError", PyExc_ValueError);

    py::class_<EventLog>(m, "EventLog")
        .def("__len__", &EventLog::size)
        .def("to_csv", &csv_of)
        .def("records",
             [](const EventLog& log) {
                 py::list out;
                 for (const auto& e : log.events)
                     out.append(py::make_tuple(format_timestamp(e.timestamp), static_cast<int>(e.state), e.duration_s,
                                               e.duration_unknown));
                 return out;
             },
             "(timestamp, state, duration_s, duration_unknown) per event; state 1 is RUN.")
        .def("__eq__", [](const EventLog& a, const EventLog& b) { return a.events == b.events; })
        .def("__repr__", [](const EventLog& l) { return "<EventLog " + std::to_string(l.size()) + " events>"; });

    m.def("parse_event_log", [](const std::string& text) { return parse_event_log(std::string_view(text)); },
          py::arg("text"));
    m.def("generate_event_log",
          [](const py::object& config) {
              const auto cfg = config_of(config);
              GeneratorConfig g = cfg.generator;
              g.seed = cfg.seed;
              py::gil_scoped_release unlocked;
              return generate_event_log(g);
          },
          py::arg("config") = py::none(), "Synthetic log from the generator section and seed of a config dict.");
    m.def("clean_event_log",
          [](const EventLog& log, const py::object& config) {
              const auto r = clean_event_log(log, config_of(config).schedule);
              py::dict stats;
              stats["duplicates_removed"] = r.duplicates_removed;
              stats["schedule_removed"] = r.schedule_removed;
              return py::make_tuple(r.log, stats);
          },
          py::arg("log"), py::arg("config") = py::none());
    m.def("summarize_log", [](const EventLog& log) { return to_py(summary_json(summarize_log(log))); });
    m.def("categorize_stop", [](double s) { return std::string(category_name(categorize_stop(s))); });

    m.def("resample",
          [](const EventLog& cleaned, std::int64_t width_s, bool drop_idle) {
              auto s = resample(cleaned, width_s);
              if (drop_idle) s = drop_idle_intervals(s);
              py::dict out;
              std::vector<std::string> stamps;
              for (const auto& r : s.records) stamps.push_back(format_timestamp_seconds(r.start));
              out["timestamp"] = stamps;
              for (auto c : kAllCategories) {
                  std::vector<double> sums, counts;
                  for (const auto& r : s.records) {
                      sums.push_back(r.stop_sum(c));
                      counts.push_back(static_cast<double>(r.count(c)));
                  }
                  out[py::str(std::string(category_name(c)) + "_sum")] = sums;
                  out[py::str(std::string(category_name(c)) + "_count")] = counts;
              }
              std::vector<double> run_sum, run_count;
              for (const auto& r : s.records) {
                  run_sum.push_back(r.run_sum_s);
                  run_count.push_back(static_cast<double>(r.run_count));
              }
              out["run_sum"] = run_sum;
              out["run_count"] = run_count;
              return out;
          },
          py::arg("cleaned"), py::arg("width_s"), py::arg("drop_idle") = true,
          "Column dict of per-interval stop sums and counts.");
    m.def("build_features",
          [](const EventLog& cleaned, std::int64_t width_s, const py::object& config) {
              const auto cfg = config_of(config);
              const auto s = drop_idle_intervals(resample(cleaned, width_s));
              return columns_of(build_feature_matrix(s, cleaned, cfg.features));
          },
          py::arg("cleaned"), py::arg("width_s") = 3600, py::arg("config") = py::none());

    m.def("benchmark_forecast",
          [](const std::string& kind, const std::vector<double>& train, std::size_t horizon, std::size_t window) {
              return benchmark_forecast(benchmark_of(kind), train, horizon, window);
          },
          py::arg("kind"), py::arg("train"), py::arg("horizon"), py::arg("window") = 7,
          "kind is naive, static_mean, moving_mean or moving_median.");
    m.def("in_sample_errors",
          [](const std::string& kind, const std::vector<double>& train, std::size_t window) {
              return in_sample_one_step_errors(benchmark_of(kind), train, window);
          },
          py::arg("kind"), py::arg("train"), py::arg("window") = 7);
    m.def("holt_winters",
          [](const std::vector<double>& train, std::size_t horizon, std::size_t period) {
              const auto s = fit_holt_winters(train, period);
              py::dict out;
              out["alpha"] = s.alpha;
              out["beta"] = s.beta;
              out["gamma"] = s.gamma;
              out["level"] = s.level;
              out["trend"] = s.trend;
              out["seasonal"] = s.seasonal;
              out["sse"] = s.sse;
              out["forecast"] = holt_winters_forecast(s, horizon);
              return out;
          },
          py::arg("train"), py::arg("horizon"), py::arg("period") = 7);
    m.def("arima",
          [](const std::vector<double>& train, std::size_t horizon, std::tuple<int, int, int> order) {
              const auto [p, d, q] = order;
              const auto a = fit_arima(train, p, d, q);
              py::dict out;
              out["phi"] = a.phi;
              out["theta"] = a.theta;
              out["intercept"] = a.intercept;
              out["sigma2"] = a.sigma2;
              out["converged"] = a.converged;
              out["forecast"] = arima_forecast(a, train, horizon);
              return out;
          },
          py::arg("train"), py::arg("horizon"), py::arg("order") = std::tuple<int, int, int>{1, 0, 1});

    py::class_<ForestModel>(m, "Forest")
        .def("predict",
             [](const ForestModel& f, const std::vector<std::vector<double>>& X) {
                 std::vector<double> out;
                 for (const auto& x : X) out.push_back(predict_forest(f, x));
                 return out;
             })
        .def("to_json", [](const ForestModel& f) { return to_py(f.to_json()); })
        .def_property_readonly("n_trees", [](const ForestModel& f) { return f.trees.size(); });
    m.def("fit_forest",
          [](const std::vector<std::vector<double>>& X, const std::vector<double>& y, int n_trees,
             const std::string& mode, const std::string& task, int max_depth, int min_samples_leaf,
             std::uint64_t seed) {
              ForestParams p;
              p.n_trees = n_trees;
              if (mode != "bagged_rf" && mode != "extra_trees") throw Error("mode must be bagged_rf or extra_trees");
              p.mode = mode == "bagged_rf" ? ForestMode::BaggedRF : ForestMode::ExtraTrees;
              if (task != "regression" && task != "classification")
                  throw Error("task must be regression or classification");
              p.task = task == "regression" ? Task::Regression : Task::Classification;
              p.max_depth = max_depth;
              p.min_samples_leaf = min_samples_leaf;
              p.seed = seed;
              const Matrix M = matrix_of(X);
              py::gil_scoped_release unlocked;
              return fit_forest(M, y, p);
          },
          py::arg("X"), py::arg("y"), py::arg("n_trees") = 200, py::arg("mode") = "bagged_rf",
          py::arg("task") = "regression", py::arg("max_depth") = 12, py::arg("min_samples_leaf") = 3,
          py::arg("seed") = 0);

    py::class_<BoostedModel>(m, "BoostedModel")
        .def("predict",
             [](const BoostedModel& b, const std::vector<std::vector<double>>& X) {
                 std::vector<double> out;
                 for (const auto& x : X) out.push_back(predict_boosted(b, x));
                 return out;
             })
        .def("staged_predict", [](const BoostedModel& b, const std::vector<double>& x) { return staged_predict(b, x); })
        .def("to_json", [](const BoostedModel& b) { return to_py(b.to_json()); });
    m.def("fit_gradient_boosting",
          [](const std::vector<std::vector<double>>& X, const std::vector<double>& y, int n_stages,
             double learning_rate, int max_depth, int min_samples_leaf) {
              BoostingParams p;
              p.n_stages = n_stages;
              p.learning_rate = learning_rate;
              p.max_depth = max_depth;
              p.min_samples_leaf = min_samples_leaf;
              return fit_gradient_boosting(matrix_of(X), y, p);
          },
          py::arg("X"), py::arg("y"), py::arg("n_stages") = 100, py::arg("learning_rate") = 0.1,
          py::arg("max_depth") = 3, py::arg("min_samples_leaf") = 3);

    m.def("point_metrics",
          [](const std::vector<double>& actual, const std::vector<double>& forecast) {
              const auto pm = point_metrics(actual, forecast);
              py::dict out;
              out["mae"] = pm.mae;
              out["rmse"] = pm.rmse;
              out["mape"] = pm.mape ? py::cast(*pm.mape) : py::none();
              out["n"] = pm.n;
              out["excluded_zero_actuals"] = pm.excluded_zero_actuals;
              return out;
          },
          py::arg("actual"), py::arg("forecast"));
    m.def("mase", [](double test_mae, const std::vector<double>& errors) { return mase(test_mae, errors); },
          py::arg("test_mae"), py::arg("benchmark_errors"));
    m.def("classification_report",
          [](std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn) {
              const auto r = classification_report(ConfusionMatrix{tp, fp, fn, tn});
              auto cls = [](const ClassMetrics& c) {
                  py::dict d;
                  d["precision"] = c.precision;
                  d["recall"] = c.recall;
                  d["f_measure"] = c.f_measure;
                  d["degenerate"] = c.degenerate;
                  return d;
              };
              py::dict out;
              out["accuracy"] = r.accuracy;
              out["alarm"] = cls(r.alarm);
              out["ignore"] = cls(r.ignore);
              return out;
          },
          py::arg("tp"), py::arg("fp"), py::arg("fn"), py::arg("tn"));
    m.def("round_percent", &round_percent);

    m.def("enumerate_combinations",
          [](const std::vector<std::string>& ids, std::size_t min_size) {
              std::vector<std::string> names;
              for (const auto& s : enumerate_combinations(ids, min_size)) names.push_back(s.name());
              return names;
          },
          py::arg("ids"), py::arg("min_size") = 2);
    m.def("average_ensemble_forecast",
          [](const std::vector<std::vector<double>>& members) { return average_ensemble_forecast(members); });

    m.def("default_config", [] { return to_py(config_to_json(PipelineConfig{})); });
    m.def("config_hash", [](const py::object& config) { return config_hash(config_of(config)); },
          py::arg("config") = py::none());
    m.def("run_forecast",
          [](const py::object& config, const std::optional<EventLog>& log) {
              const auto cfg = config_of(config);
              ForecastResult r;
              {
                  py::gil_scoped_release unlocked;
                  r = run_forecast_usecase(cfg, cleaned_or_prepared(cfg, log));
              }
              return to_py(forecast_report_json(r, cfg));
          },
          py::arg("config") = py::none(), py::arg("log") = py::none(),
          "Both leaderboards as a report dict. Without a log the configured input or generator is used.");
    m.def("run_classification",
          [](const py::object& config, const std::optional<EventLog>& log, const std::string& rule,
             double threshold_s) {
              const auto cfg = config_of(config);
              const auto r_rule = rule_of(rule, threshold_s);
              ClassificationResult r;
              {
                  py::gil_scoped_release unlocked;
                  r = run_classification_usecase(cfg, cleaned_or_prepared(cfg, log), r_rule);
              }
              return to_py(classification_report_json(r, cfg));
          },
          py::arg("config") = py::none(), py::arg("log") = py::none(), py::arg("rule") = "duration_exceeds",
          py::arg("threshold_s") = 600.0);
}
