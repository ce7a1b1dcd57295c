#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "stopcast/features.hpp"
#include "stopcast/synthgen.hpp"
#include "stopcast/trees.hpp"

namespace stopcast {

/// Half-open date window; an absent bound is unbounded.
struct DateRange {
    std::optional<Timestamp> from;
    std::optional<Timestamp> to;

    bool operator==(const DateRange&) const = default;
};

struct TreeSettings {
    int n_trees = 200;
    int max_depth = 12;
    int min_samples_leaf = 3;
    unsigned threads = 0;
};

struct PipelineConfig {
    /// Event log CSV. Empty means: synthesize one from `generator`.
    std::string input;
    std::string output = "out";
    std::uint64_t seed = 42;
    OperatingSchedule schedule = OperatingSchedule::plant_default();
    /// Its seed is ignored; `seed` above drives generation.
    GeneratorConfig generator;

    std::int64_t forecast_width_s = 86400;
    std::int64_t classification_width_s = 3600;
    DateRange forecast_range;
    DateRange classification_range;

    FeatureSpec features;
    double split_fraction = 0.75;

    std::size_t benchmark_window = 7;
    /// Six operating days per week once idle Sundays are dropped.
    std::size_t hw_period = 6;
    int arima_p = 1;
    int arima_d = 0;
    int arima_q = 1;

    TreeSettings trees;
    BoostingParams boosting;

    std::size_t ensemble_min_size = 2;
    std::string sort_key = "mape";

    ClassificationRule rule;

    /// Throws Error naming the offending field.
    void validate() const;
};

nlohmann::ordered_json config_to_json(const PipelineConfig& cfg);
/// Absent fields keep their defaults; unknown keys are rejected.
PipelineConfig config_from_json(const nlohmann::json& j);

PipelineConfig load_config(const std::string& path);
void save_config(const PipelineConfig& cfg, const std::string& path);

/// FNV-1a over the canonical JSON form, ignoring the output directory. Hex encoded.
std::string config_hash(const PipelineConfig& cfg);

/// STOPCAST_OUTPUT_DIR and STOPCAST_SEED take precedence over the file.
void apply_env_overrides(PipelineConfig& cfg);

}  // namespace stopcast
