#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "stopcast/pipeline.hpp"

namespace fs = std::filesystem;
using namespace stopcast;
using nlohmann::json;

namespace {

struct Options {
    std::string config;
    std::string input;
    std::string output;
    std::optional<std::uint64_t> seed;
    std::string rule;
    std::optional<double> threshold;
    std::size_t top = 5;
    std::string write_config;
};

PipelineConfig resolve(const Options& o) {
    PipelineConfig cfg = o.config.empty() ? PipelineConfig{} : load_config(o.config);
    apply_env_overrides(cfg);
    if (!o.input.empty()) cfg.input = o.input;
    if (!o.output.empty()) cfg.output = o.output;
    if (o.seed) cfg.seed = *o.seed;
    cfg.validate();
    return cfg;
}

fs::path out_path(const PipelineConfig& cfg, const std::string& name) {
    fs::create_directories(cfg.output);
    return fs::path(cfg.output) / name;
}

template <typename F>
void write_file(const fs::path& path, F&& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    body(out);
    if (!out) throw Error("failed writing " + path.string());
    std::cout << "wrote " << path.string() << '\n';
}

void write_json(const fs::path& path, const nlohmann::ordered_json& j) {
    write_file(path, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
}

EventLog read_log(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read " + path.string());
    return parse_event_log(in, path.string());
}

/// Raw log for the prepare stage: the configured input, else a previously generated
/// log in the output directory, else a fresh synthetic one.
PreparedLog prepare_stage_input(const PipelineConfig& cfg) {
    if (cfg.input.empty()) {
        const auto generated = fs::path(cfg.output) / "events.csv";
        if (fs::exists(generated)) {
            PreparedLog p;
            p.raw = staged("load", [&] { return read_log(generated); });
            p.cleaning = staged("clean", [&] { return clean_event_log(p.raw, cfg.schedule); });
            return p;
        }
    }
    return prepare(cfg);
}

void persist_cleaned(const PipelineConfig& cfg, const PreparedLog& p) {
    write_file(out_path(cfg, "events_clean.csv"), [&](std::ostream& out) {
        out << artifact_comment(cfg);
        write_event_log(p.cleaning.log, out);
    });
    nlohmann::ordered_json report = {{"config_hash", config_hash(cfg)},
                                     {"seed", cfg.seed},
                                     {"raw_events", p.raw.size()},
                                     {"duplicates_removed", p.cleaning.duplicates_removed},
                                     {"schedule_removed", p.cleaning.schedule_removed},
                                     {"clean_events", p.cleaning.log.size()},
                                     {"summary", summary_json(summarize_log(p.cleaning.log))}};
    write_json(out_path(cfg, "cleaning_report.json"), report);
}

/// Cleaned log persisted by `prepare`; runs that stage first when it is missing.
EventLog cleaned_log(const PipelineConfig& cfg) {
    const auto path = fs::path(cfg.output) / "events_clean.csv";
    if (!fs::exists(path)) {
        auto p = prepare_stage_input(cfg);
        persist_cleaned(cfg, p);
        return p.cleaning.log;
    }
    auto raw = staged("load", [&] { return read_log(path); });
    return staged("clean", [&] { return clean_event_log(raw, cfg.schedule).log; });
}

void cmd_generate(const PipelineConfig& cfg) {
    GeneratorConfig g = cfg.generator;
    g.seed = cfg.seed;
    const auto log = staged("generate", [&] { return generate_event_log(g); });
    write_file(out_path(cfg, "events.csv"), [&](std::ostream& out) {
        out << artifact_comment(cfg);
        write_event_log(log, out);
    });
    const auto cleaned = staged("clean", [&] { return clean_event_log(log, cfg.schedule).log; });
    auto summary = summary_json(summarize_log(cleaned));
    nlohmann::ordered_json j = {{"config_hash", config_hash(cfg)}, {"seed", cfg.seed}, {"events", log.size()}};
    for (auto& [k, v] : summary.items()) j[k] = v;
    write_json(out_path(cfg, "generator_summary.json"), j);
}

void cmd_prepare(const PipelineConfig& cfg) { persist_cleaned(cfg, prepare_stage_input(cfg)); }

void write_features(const PipelineConfig& cfg, const EventLog& log, std::int64_t width, const DateRange& range,
                    const std::string& tag, bool regression_target) {
    const auto series = interval_series(log, width, range);
    write_file(out_path(cfg, "intervals_" + tag + ".csv"), [&](std::ostream& out) {
        out << artifact_comment(cfg);
        write_interval_series(series, out);
    });
    auto m = staged("features", [&] { return build_feature_matrix(series, log, cfg.features); });
    if (regression_target) m = attach_regression_target(m);
    else m = attach_classification_target(m, cfg.rule);
    write_file(out_path(cfg, "features_" + tag + ".csv"), [&](std::ostream& out) {
        out << artifact_comment(cfg);
        write_feature_matrix(m, out);
    });
    auto manifest = nlohmann::ordered_json::parse(feature_manifest_json(m, cfg.features));
    manifest["config_hash"] = config_hash(cfg);
    manifest["seed"] = cfg.seed;
    write_json(out_path(cfg, "features_" + tag + ".json"), manifest);
}

void cmd_features(const PipelineConfig& cfg) {
    const auto log = cleaned_log(cfg);
    write_features(cfg, log, cfg.forecast_width_s, cfg.forecast_range, "daily", true);
    write_features(cfg, log, cfg.classification_width_s, cfg.classification_range, "hourly", false);
}

void cmd_forecast(const PipelineConfig& cfg) {
    const auto result = run_forecast_usecase(cfg, cleaned_log(cfg));
    for (const auto* cat : {&result.forecasting, &result.regression}) {
        write_file(out_path(cfg, cat->category + "_leaderboard.csv"), [&](std::ostream& out) {
            out << artifact_comment(cfg);
            write_leaderboard_csv(cat->leaderboard, out);
        });
    }
    write_file(out_path(cfg, "forecasts.csv"), [&](std::ostream& out) {
        out << artifact_comment(cfg);
        write_forecasts_csv(result, out);
    });
    write_json(out_path(cfg, "forecast_report.json"), forecast_report_json(result, cfg));
    nlohmann::ordered_json models = {{"config_hash", config_hash(cfg)},
                                     {"seed", cfg.seed},
                                     {"forecasting", result.forecasting.models.fitted},
                                     {"regression", result.regression.models.fitted}};
    write_file(out_path(cfg, "forecast_models.json"), [&](std::ostream& out) { out << models.dump() << '\n'; });
    for (const auto* cat : {&result.forecasting, &result.regression})
        for (const auto& [id, why] : cat->models.failures)
            std::cerr << "stopcast forecast: warning: " << cat->category << " model " << id << " failed: " << why
                      << '\n';
}

ClassificationRule rule_from(const Options& o, const PipelineConfig& cfg) {
    ClassificationRule rule = cfg.rule;
    if (o.rule == "duration_exceeds") rule.kind = ClassificationRule::Kind::DurationExceeds;
    else if (o.rule == "breakdown_occurs") rule.kind = ClassificationRule::Kind::BreakdownOccurs;
    else if (!o.rule.empty()) throw Error("unknown rule '" + o.rule + "'");
    if (o.threshold) rule.threshold_s = *o.threshold;
    return rule;
}

void cmd_classify(const PipelineConfig& cfg, const ClassificationRule& rule) {
    const auto result = run_classification_usecase(cfg, cleaned_log(cfg), rule);
    write_json(out_path(cfg, "classification_" + rule.name() + ".json"), classification_report_json(result, cfg));
}

std::string cell(const json& v, double scale = 1.0) {
    if (v.is_null()) return "-";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v.get<double>() * scale);
    return buf;
}

void print_board(const json& cat, const std::string& title, std::size_t top) {
    std::printf("%s (top %zu of %zu)\n", title.c_str(), std::min(top, cat["results"].size()), cat["results"].size());
    std::printf("  %-4s %-44s %8s %8s %8s %8s %8s %8s %8s\n", "rank", "name", "MAPE", "MAE", "RMSE", "MASE-mm",
                "MASE-sm", "MASE-md", "MASE-n");
    std::size_t rank = 0;
    for (const auto& r : cat["results"]) {
        if (rank == top) break;
        const auto& m = r["mase"];
        std::printf("  %-4zu %-44s %8s %8s %8s %8s %8s %8s %8s\n", ++rank, r["model"].get<std::string>().c_str(),
                    cell(r["mape"]).c_str(), cell(r["mae"], 1.0 / 60).c_str(), cell(r["rmse"], 1.0 / 60).c_str(),
                    cell(m["moving_mean"]).c_str(), cell(m["static_mean"]).c_str(), cell(m["moving_median"]).c_str(),
                    cell(m["naive"]).c_str());
    }
    if (!cat["failures"].empty()) {
        std::printf("  failed models:");
        for (auto& [id, why] : cat["failures"].items()) std::printf(" %s (%s)", id.c_str(), why.get<std::string>().c_str());
        std::printf("\n");
    }
}

void cmd_report(const PipelineConfig& cfg, std::size_t top) {
    bool any = false;
    const auto fpath = fs::path(cfg.output) / "forecast_report.json";
    if (fs::exists(fpath)) {
        std::ifstream in(fpath);
        const json j = json::parse(in);
        std::printf("forecast report  config_hash=%s seed=%s  (MAE/RMSE in minutes)\n",
                    j["config_hash"].get<std::string>().c_str(), j["seed"].dump().c_str());
        print_board(j["forecasting"], "forecasting models", top);
        print_board(j["regression"], "regression models", top);
        any = true;
    }
    for (const char* rule : {"duration_exceeds", "breakdown_occurs"}) {
        const auto path = fs::path(cfg.output) / (std::string("classification_") + rule + ".json");
        if (!fs::exists(path)) continue;
        std::ifstream in(path);
        const json j = json::parse(in);
        const auto& cm = j["confusion"];
        std::printf("\nclassification %s  (n_test=%s, positive share %.0f%%)\n", rule, j["n_test"].dump().c_str(),
                    100.0 * j["class_balance"]["test_positive_share"].get<double>());
        std::printf("  %-16s %10s %10s\n", "", "pred ignore", "pred alarm");
        std::printf("  %-16s %10s %10s\n", "actual ignore", cm["tn"].dump().c_str(), cm["fp"].dump().c_str());
        std::printf("  %-16s %10s %10s\n", "actual alarm", cm["fn"].dump().c_str(), cm["tp"].dump().c_str());
        std::printf("  %-8s %9s %7s %9s\n", "class", "precision", "recall", "f-measure");
        for (const char* cls : {"alarm", "ignore"}) {
            const auto& c = j["per_class"][cls];
            std::printf("  %-8s %8s%% %6s%% %8s%%\n", cls, c["precision_pct"].dump().c_str(),
                        c["recall_pct"].dump().c_str(), c["f_measure_pct"].dump().c_str());
        }
        std::printf("  accuracy %s%%\n", j["accuracy_pct"].dump().c_str());
        any = true;
    }
    if (!any) throw Error("no reports found in " + cfg.output);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stoppage forecasting pipeline for machine RUN/STOP event logs"};
    app.require_subcommand(1);
    Options o;
    auto common = [&](CLI::App* sub) {
        sub->add_option("-c,--config", o.config, "JSON config file");
        sub->add_option("-o,--output", o.output, "Output directory");
        sub->add_option("--seed", o.seed, "Random seed");
    };

    auto* gen = app.add_subcommand("generate", "Synthesize an event log");
    auto* prep = app.add_subcommand("prepare", "Load or synthesize, then clean the event log");
    auto* feat = app.add_subcommand("features", "Resample and build the daily and hourly feature matrices");
    auto* fc = app.add_subcommand("forecast", "Fit forecasters and regressors, rank models and ensembles");
    auto* cls = app.add_subcommand("classify", "Random-forest stoppage alarm classifier");
    auto* rep = app.add_subcommand("report", "Print the leaderboards and classification tables");
    auto* conf = app.add_subcommand("config", "Print or write the resolved configuration");
    for (auto* sub : {gen, prep, feat, fc, cls, rep, conf}) common(sub);
    for (auto* sub : {prep, feat, fc, cls}) sub->add_option("-i,--input", o.input, "Event log CSV");
    cls->add_option("--rule", o.rule, "duration_exceeds or breakdown_occurs")
        ->check(CLI::IsMember({"duration_exceeds", "breakdown_occurs"}));
    cls->add_option("--threshold", o.threshold, "Seconds of minor stoppage for duration_exceeds");
    rep->add_option("--top", o.top, "Leaderboard rows to show");
    conf->add_option("--write", o.write_config, "Write the config to this path instead of printing it");

    CLI11_PARSE(app, argc, argv);

    const std::string stage = app.get_subcommands().front()->get_name();
    try {
        const PipelineConfig cfg = resolve(o);
        if (stage == "generate") cmd_generate(cfg);
        else if (stage == "prepare") cmd_prepare(cfg);
        else if (stage == "features") cmd_features(cfg);
        else if (stage == "forecast") cmd_forecast(cfg);
        else if (stage == "classify") cmd_classify(cfg, rule_from(o, cfg));
        else if (stage == "report") cmd_report(cfg, o.top);
        else if (stage == "config") {
            if (o.write_config.empty()) std::cout << config_to_json(cfg).dump(2) << '\n';
            else save_config(cfg, o.write_config);
        }
    } catch (const std::exception& e) {
        std::cerr << "stopcast " << stage << ": error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
