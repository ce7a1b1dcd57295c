#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "stopcast/config.hpp"

using namespace stopcast;
using nlohmann::json;

namespace {

std::string error_of(const json& j) {
    try {
        config_from_json(j);
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("stopcast_test_" + name);
}

}  // namespace

TEST_CASE("a minimal config takes every default") {
    const auto cfg = config_from_json(json::parse(R"({"input": "events.csv", "output": "runs/a"})"));
    CHECK(cfg.input == "events.csv");
    CHECK(cfg.output == "runs/a");
    PipelineConfig defaults;
    defaults.input = "events.csv";
    defaults.output = "runs/a";
    CHECK(config_to_json(cfg) == config_to_json(defaults));
    CHECK(cfg.split_fraction == 0.75);
    CHECK(cfg.features.lag_depth == 5);
    CHECK(cfg.trees.n_trees == 200);
    CHECK(cfg.schedule == OperatingSchedule::plant_default());
}

TEST_CASE("invariant violations name the field") {
    CHECK(error_of(json::parse(R"({"split_fraction": 1.2})")).find("split_fraction") != std::string::npos);
    CHECK(error_of(json::parse(R"({"resample": {"forecast_width_s": 700}})")).find("forecast_width_s") !=
          std::string::npos);
    CHECK(error_of(json::parse(R"({"features": {"lag_depth": 0}})")).find("features") != std::string::npos);
    CHECK(error_of(json::parse(R"({"forecasting": {"arima_order": [1, 3, 1]}})")) != "");
    CHECK(error_of(json::parse(R"({"ensembles": {"sort_key": "r2"}})")) != "");
}

TEST_CASE("unknown keys are rejected") {
    CHECK(error_of(json::parse(R"({"splitfraction": 0.5})")) == "unknown config key 'splitfraction'");
    CHECK(error_of(json::parse(R"({"trees": {"n_tree": 10}})")) == "unknown config key 'trees.n_tree'");
}

TEST_CASE("save then load gives the same config") {
    PipelineConfig cfg;
    cfg.input = "x.csv";
    cfg.seed = 7;
    cfg.split_fraction = 0.8;
    cfg.features.calendar = {CalendarField::Hour};
    cfg.forecast_range.from = make_timestamp(2019, 2, 1);
    cfg.classification_range.to = make_timestamp(2019, 8, 1);
    cfg.rule = ClassificationRule::breakdown_occurs();
    cfg.schedule = OperatingSchedule({{0, 6 * kMsPerHour, 22 * kMsPerHour}, {2, 0, kMsPerDay}});
    cfg.generator.stops[0].weight = 0.3;
    cfg.generator.stops[1].weight = 0.6496;
    const auto path = temp_file("roundtrip.json");
    save_config(cfg, path.string());
    const auto back = load_config(path.string());
    CHECK(config_to_json(back) == config_to_json(cfg));
    CHECK(config_hash(back) == config_hash(cfg));
    std::filesystem::remove(path);
}

TEST_CASE("config files may carry comments") {
    const auto path = temp_file("comments.json");
    std::ofstream(path) << "{\n  // training share\n  \"split_fraction\": 0.6\n}\n";
    CHECK(load_config(path.string()).split_fraction == 0.6);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_config(path.string()), Error);
}

TEST_CASE("config hash ignores the output directory only") {
    PipelineConfig a, b;
    b.output = "elsewhere";
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a).size() == 16);
    b.seed = 43;
    CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("environment overrides") {
    PipelineConfig cfg;
    setenv("STOPCAST_OUTPUT_DIR", "/tmp/env_out", 1);
    setenv("STOPCAST_SEED", "99", 1);
    apply_env_overrides(cfg);
    CHECK(cfg.output == "/tmp/env_out");
    CHECK(cfg.seed == 99);
    setenv("STOPCAST_SEED", "abc", 1);
    CHECK_THROWS_AS(apply_env_overrides(cfg), Error);
    unsetenv("STOPCAST_OUTPUT_DIR");
    unsetenv("STOPCAST_SEED");
    PipelineConfig untouched;
    apply_env_overrides(untouched);
    CHECK(untouched.output == "out");
    CHECK(untouched.seed == 42);
}
