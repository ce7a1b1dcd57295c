#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stopcast/metrics.hpp"

namespace stopcast {

/// A set of at least two distinct models whose forecasts are averaged.
class EnsembleSpec {
public:
    /// Sorts the members; throws Error on fewer than two or on duplicates.
    explicit EnsembleSpec(std::vector<std::string> members);

    const std::vector<std::string>& members() const { return members_; }
    std::size_t size() const { return members_.size(); }
    /// Members joined with "_".
    std::string name() const;

    bool operator==(const EnsembleSpec&) const = default;

private:
    std::vector<std::string> members_;
};

/// Every subset of size min_size..k, once, ordered by (size, name).
std::vector<EnsembleSpec> enumerate_combinations(const std::vector<std::string>& model_ids,
                                                 std::size_t min_size = 2);

/// Element-wise mean of the member forecasts.
std::vector<double> average_ensemble_forecast(std::span<const std::vector<double>> predictions);

/// Ascending by `sort_key`, ties by name.
std::vector<MetricsReport> rank_leaderboard(std::vector<MetricsReport> evaluations, const std::string& sort_key);

}  // namespace stopcast
