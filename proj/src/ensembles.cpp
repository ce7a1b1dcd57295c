#include "stopcast/ensembles.hpp"

#include <algorithm>
#include <set>

namespace stopcast {

EnsembleSpec::EnsembleSpec(std::vector<std::string> members) : members_(std::move(members)) {
    std::sort(members_.begin(), members_.end());
    if (members_.size() < 2) throw Error("an ensemble needs at least two members");
    if (std::adjacent_find(members_.begin(), members_.end()) != members_.end())
        throw Error("ensemble members must be distinct");
}

std::string EnsembleSpec::name() const {
    std::string out;
    for (const auto& m : members_) {
        if (!out.empty()) out += '_';
        out += m;
    }
    return out;
}

std::vector<EnsembleSpec> enumerate_combinations(const std::vector<std::string>& model_ids, std::size_t min_size) {
    std::vector<std::string> ids = model_ids;
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) throw Error("duplicate model ids");
    const std::size_t k = ids.size();
    if (min_size < 2 || min_size > k) throw Error("min_size must lie in [2, number of models]");
    if (k > 20) throw Error("too many models to enumerate");

    std::vector<EnsembleSpec> out;
    for (std::size_t size = min_size; size <= k; ++size) {
        // Lexicographic walk over index combinations of the sorted ids.
        std::vector<std::size_t> pick(size);
        for (std::size_t i = 0; i < size; ++i) pick[i] = i;
        std::vector<EnsembleSpec> level;
        while (true) {
            std::vector<std::string> members;
            for (auto i : pick) members.push_back(ids[i]);
            level.emplace_back(std::move(members));
            std::size_t i = size;
            while (i > 0 && pick[i - 1] == k - size + i - 1) --i;
            if (i == 0) break;
            ++pick[i - 1];
            for (std::size_t j = i; j < size; ++j) pick[j] = pick[j - 1] + 1;
        }
        std::sort(level.begin(), level.end(),
                  [](const EnsembleSpec& a, const EnsembleSpec& b) { return a.name() < b.name(); });
        for (auto& s : level) out.push_back(std::move(s));
    }
    return out;
}

std::vector<double> average_ensemble_forecast(std::span<const std::vector<double>> predictions) {
    if (predictions.size() < 2) throw Error("an ensemble needs at least two member forecasts");
    const std::size_t n = predictions.front().size();
    for (const auto& p : predictions)
        if (p.size() != n) throw Error("member forecasts differ in length");
    std::vector<double> out(n, 0.0);
    // Running mean: identical members reproduce the member exactly.
    for (std::size_t k = 0; k < predictions.size(); ++k)
        for (std::size_t i = 0; i < n; ++i) out[i] += (predictions[k][i] - out[i]) / static_cast<double>(k + 1);
    return out;
}

std::vector<MetricsReport> rank_leaderboard(std::vector<MetricsReport> evaluations, const std::string& sort_key) {
    if (evaluations.empty()) throw Error("cannot rank an empty leaderboard");
    for (const auto& e : evaluations)
        if (!e.metric(sort_key)) throw Error("metric '" + sort_key + "' missing for " + e.model);
    std::stable_sort(evaluations.begin(), evaluations.end(), [&](const MetricsReport& a, const MetricsReport& b) {
        const double va = *a.metric(sort_key), vb = *b.metric(sort_key);
        if (va != vb) return va < vb;
        return a.model < b.model;
    });
    return evaluations;
}

}  // namespace stopcast
