#include "stopcast/trees.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>

namespace stopcast {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows * cols) throw Error("matrix data size does not match its shape");
}

Matrix Matrix::from_features(const FeatureMatrix& m) { return Matrix(m.rows(), m.cols(), m.row_major()); }

namespace {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    std::size_t index(std::size_t n) {
        return std::min(n - 1, static_cast<std::size_t>(uniform() * static_cast<double>(n)));
    }

private:
    std::mt19937_64 engine_;
};

struct Split {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

class Builder {
public:
    Builder(const Matrix& X, std::span<const double> y, const TreeParams& params, std::size_t n_classes)
        : X_(X), y_(y), params_(params), rng_(params.seed), n_classes_(n_classes) {
        tree_.task = params.task;
        tree_.n_features = X.cols();
        tree_.n_classes = n_classes;
    }

    DecisionTree run(std::vector<std::size_t> sample) {
        idx_ = std::move(sample);
        build(0, idx_.size(), 0);
        return std::move(tree_);
    }

private:
    const Matrix& X_;
    std::span<const double> y_;
    TreeParams params_;
    Rng rng_;
    std::size_t n_classes_;
    DecisionTree tree_;
    std::vector<std::size_t> idx_;
    std::vector<std::pair<double, std::size_t>> scratch_;

    bool classification() const { return params_.task == Task::Classification; }

    // Sum of squared deviations (regression) or n * Gini (classification).
    double impurity(std::size_t begin, std::size_t end, TreeNode& node) const {
        const auto n = static_cast<double>(end - begin);
        if (classification()) {
            node.class_counts.assign(n_classes_, 0);
            for (std::size_t i = begin; i < end; ++i) ++node.class_counts[static_cast<std::size_t>(y_[idx_[i]])];
            double sq = 0.0;
            std::size_t best = 0;
            for (std::size_t c = 0; c < n_classes_; ++c) {
                sq += static_cast<double>(node.class_counts[c] * node.class_counts[c]);
                if (node.class_counts[c] > node.class_counts[best]) best = c;
            }
            node.value = static_cast<double>(best);
            return n - sq / n;
        }
        double s = 0.0;
        for (std::size_t i = begin; i < end; ++i) s += y_[idx_[i]];
        const double mean = s / n;
        double ss = 0.0;
        for (std::size_t i = begin; i < end; ++i) ss += (y_[idx_[i]] - mean) * (y_[idx_[i]] - mean);
        node.value = mean;
        return ss;
    }

    std::vector<int> candidate_features() {
        const auto f = static_cast<int>(X_.cols());
        std::vector<int> all(static_cast<std::size_t>(f));
        std::iota(all.begin(), all.end(), 0);
        const int k = params_.features_per_split;
        if (k <= 0 || k >= f) return all;
        for (int i = 0; i < k; ++i) {
            const auto j = static_cast<std::size_t>(i) + rng_.index(static_cast<std::size_t>(f - i));
            std::swap(all[static_cast<std::size_t>(i)], all[j]);
        }
        all.resize(static_cast<std::size_t>(k));
        std::sort(all.begin(), all.end());
        return all;
    }

    // Criterion reduction of a partition given left/right accumulators.
    struct Acc {
        double n = 0.0, sum = 0.0;
        std::vector<double> counts;
        double sq_counts = 0.0;
    };

    void acc_add(Acc& a, double y) const {
        a.n += 1.0;
        if (classification()) {
            auto& c = a.counts[static_cast<std::size_t>(y)];
            a.sq_counts += 2.0 * c + 1.0;
            c += 1.0;
        } else {
            a.sum += y;
        }
    }
    void acc_remove(Acc& a, double y) const {
        a.n -= 1.0;
        if (classification()) {
            auto& c = a.counts[static_cast<std::size_t>(y)];
            a.sq_counts -= 2.0 * c - 1.0;
            c -= 1.0;
        } else {
            a.sum -= y;
        }
    }
    double score(const Acc& a) const {
        // Larger is better; the parent's score is constant within a node.
        if (a.n == 0.0) return 0.0;
        return classification() ? a.sq_counts / a.n : a.sum * a.sum / a.n;
    }
    Acc make_acc() const {
        Acc a;
        if (classification()) a.counts.assign(n_classes_, 0.0);
        return a;
    }

    Split best_exhaustive(std::size_t begin, std::size_t end, const std::vector<int>& features,
                          double parent_score) {
        Split best;
        const std::size_t n = end - begin;
        const auto min_leaf = static_cast<std::size_t>(std::max(1, params_.min_samples_leaf));
        scratch_.resize(n);
        for (int f : features) {
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t r = idx_[begin + i];
                scratch_[i] = {X_(r, static_cast<std::size_t>(f)), r};
            }
            std::sort(scratch_.begin(), scratch_.end());
            Acc left = make_acc(), right = make_acc();
            for (std::size_t i = 0; i < n; ++i) acc_add(right, y_[scratch_[i].second]);
            for (std::size_t i = 0; i + 1 < n; ++i) {
                const double yi = y_[scratch_[i].second];
                acc_add(left, yi);
                acc_remove(right, yi);
                const double a = scratch_[i].first, b = scratch_[i + 1].first;
                if (a == b) continue;
                if (i + 1 < min_leaf || n - i - 1 < min_leaf) continue;
                const double gain = score(left) + score(right) - parent_score;
                if (gain > best.gain) {
                    double thr = 0.5 * (a + b);
                    if (!(thr < b)) thr = a;
                    best = {f, thr, gain};
                }
            }
        }
        return best;
    }

    Split best_random_cut(std::size_t begin, std::size_t end, const std::vector<int>& features,
                          double parent_score) {
        Split best;
        const auto min_leaf = static_cast<double>(std::max(1, params_.min_samples_leaf));
        for (int f : features) {
            const auto col = static_cast<std::size_t>(f);
            double lo = X_(idx_[begin], col), hi = lo;
            for (std::size_t i = begin; i < end; ++i) {
                lo = std::min(lo, X_(idx_[i], col));
                hi = std::max(hi, X_(idx_[i], col));
            }
            if (!(hi > lo)) continue;
            double thr = lo + rng_.uniform() * (hi - lo);
            if (!(thr < hi)) thr = lo;
            Acc left = make_acc(), right = make_acc();
            for (std::size_t i = begin; i < end; ++i) {
                const std::size_t r = idx_[i];
                acc_add(X_(r, col) <= thr ? left : right, y_[r]);
            }
            if (left.n < min_leaf || right.n < min_leaf) continue;
            const double gain = score(left) + score(right) - parent_score;
            if (gain > best.gain) best = {f, thr, gain};
        }
        return best;
    }

    int build(std::size_t begin, std::size_t end, int depth) {
        const int id = static_cast<int>(tree_.nodes.size());
        tree_.nodes.emplace_back();
        TreeNode node;
        node.samples = end - begin;
        const double parent_impurity = impurity(begin, end, node);
        const std::size_t n = end - begin;
        const bool depth_limited = params_.max_depth > 0 && depth >= params_.max_depth;
        const auto min_leaf = static_cast<std::size_t>(std::max(1, params_.min_samples_leaf));
        if (depth_limited || n < 2 * min_leaf || parent_impurity <= 0.0) {
            tree_.nodes[static_cast<std::size_t>(id)] = std::move(node);
            return id;
        }

        Acc whole = make_acc();
        for (std::size_t i = begin; i < end; ++i) acc_add(whole, y_[idx_[i]]);
        const double parent_score = score(whole);
        const auto features = candidate_features();
        Split split = params_.split == SplitMode::Exhaustive
                          ? best_exhaustive(begin, end, features, parent_score)
                          : best_random_cut(begin, end, features, parent_score);
        // Reductions at rounding level are not real structure.
        if (split.feature < 0 || split.gain <= 1e-12 * parent_impurity) {
            tree_.nodes[static_cast<std::size_t>(id)] = std::move(node);
            return id;
        }
        const auto col = static_cast<std::size_t>(split.feature);
        auto mid = std::stable_partition(idx_.begin() + static_cast<std::ptrdiff_t>(begin),
                                         idx_.begin() + static_cast<std::ptrdiff_t>(end),
                                         [&](std::size_t r) { return X_(r, col) <= split.threshold; });
        const auto m = static_cast<std::size_t>(mid - idx_.begin());
        node.feature = split.feature;
        node.threshold = split.threshold;
        tree_.nodes[static_cast<std::size_t>(id)] = node;
        const int l = build(begin, m, depth + 1);
        const int r = build(m, end, depth + 1);
        tree_.nodes[static_cast<std::size_t>(id)].left = l;
        tree_.nodes[static_cast<std::size_t>(id)].right = r;
        return id;
    }
};

std::size_t count_classes(std::span<const double> y) {
    double hi = 0.0;
    for (double v : y) {
        if (!(v >= 0.0) || v != std::floor(v)) throw Error("class labels must be non-negative integers");
        hi = std::max(hi, v);
    }
    return std::max<std::size_t>(2, static_cast<std::size_t>(hi) + 1);
}

void validate_fit(const Matrix& X, std::span<const double> y, const TreeParams& params) {
    if (X.rows() == 0 || X.cols() == 0) throw Error("cannot fit a tree on empty data");
    if (X.rows() != y.size()) throw Error("feature rows and target length differ");
    for (double v : y)
        if (!std::isfinite(v)) throw Error("non-finite target value");
    if (params.min_samples_leaf < 1) throw Error("min_samples_leaf must be >= 1");
}

nlohmann::json node_json(const DecisionTree& t, int id) {
    const auto& n = t.nodes[static_cast<std::size_t>(id)];
    nlohmann::json j;
    if (n.is_leaf()) {
        j["value"] = n.value;
        if (t.task == Task::Classification) j["class_counts"] = n.class_counts;
        j["samples"] = n.samples;
        return j;
    }
    j["feature_index"] = n.feature;
    j["threshold"] = n.threshold;
    j["value"] = n.value;
    if (t.task == Task::Classification) j["class_counts"] = n.class_counts;
    j["samples"] = n.samples;
    j["left"] = node_json(t, n.left);
    j["right"] = node_json(t, n.right);
    return j;
}

int node_from_json(DecisionTree& t, const nlohmann::json& j) {
    const int id = static_cast<int>(t.nodes.size());
    t.nodes.emplace_back();
    TreeNode n;
    n.samples = j.value("samples", std::size_t{0});
    n.value = j.value("value", 0.0);
    if (j.contains("class_counts")) n.class_counts = j.at("class_counts").get<std::vector<std::int64_t>>();
    if (j.contains("feature_index")) {
        n.feature = j.at("feature_index").get<int>();
        n.threshold = j.at("threshold").get<double>();
        n.left = node_from_json(t, j.at("left"));
        n.right = node_from_json(t, j.at("right"));
    }
    // Recursion appends the children, so write this node back by index.
    t.nodes[static_cast<std::size_t>(id)] = n;
    return id;
}

}  // namespace

// ---------------------------------------------------------------------------
// DecisionTree

const TreeNode& DecisionTree::leaf_for(std::span<const double> x) const {
    if (x.size() < n_features)
        throw Error("feature row has " + std::to_string(x.size()) + " values, tree needs " +
                    std::to_string(n_features));
    if (nodes.empty()) throw Error("tree has no nodes");
    const TreeNode* n = &nodes[0];
    while (!n->is_leaf())
        n = &nodes[static_cast<std::size_t>(x[static_cast<std::size_t>(n->feature)] <= n->threshold ? n->left : n->right)];
    return *n;
}

double DecisionTree::predict(std::span<const double> x) const { return leaf_for(x).value; }

int DecisionTree::depth() const {
    std::vector<int> d(nodes.size(), 0);
    int best = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        best = std::max(best, d[i]);
        if (!nodes[i].is_leaf()) {
            d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
            d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
        }
    }
    return best;
}

std::size_t DecisionTree::leaves() const {
    return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

nlohmann::json DecisionTree::to_json() const {
    nlohmann::json j;
    j["task"] = task == Task::Regression ? "regression" : "classification";
    j["n_features"] = n_features;
    if (task == Task::Classification) j["n_classes"] = n_classes;
    j["root"] = nodes.empty() ? nlohmann::json() : node_json(*this, 0);
    return j;
}

DecisionTree DecisionTree::from_json(const nlohmann::json& j) {
    DecisionTree t;
    t.task = j.at("task").get<std::string>() == "regression" ? Task::Regression : Task::Classification;
    t.n_features = j.at("n_features").get<std::size_t>();
    t.n_classes = j.value("n_classes", std::size_t{0});
    node_from_json(t, j.at("root"));
    return t;
}

DecisionTree fit_cart_on(const Matrix& X, std::span<const double> y, std::span<const std::size_t> sample,
                         const TreeParams& params) {
    validate_fit(X, y, params);
    if (sample.empty()) throw Error("cannot fit a tree on an empty sample");
    const std::size_t classes = params.task == Task::Classification ? count_classes(y) : 0;
    Builder b(X, y, params, classes);
    return b.run({sample.begin(), sample.end()});
}

DecisionTree fit_cart(const Matrix& X, std::span<const double> y, const TreeParams& params) {
    std::vector<std::size_t> all(X.rows());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return fit_cart_on(X, y, all, params);
}

double predict_cart(const DecisionTree& tree, std::span<const double> x) { return tree.predict(x); }

// ---------------------------------------------------------------------------
// Forests

ForestModel fit_forest(const Matrix& X, std::span<const double> y, const ForestParams& params) {
    if (params.n_trees < 1) throw Error("a forest needs at least one tree");
    const auto f = static_cast<int>(X.cols());
    int k = params.features_per_split;
    if (k <= 0)
        k = params.mode == ForestMode::BaggedRF ? static_cast<int>(std::ceil(std::sqrt(static_cast<double>(f)))) : f;
    k = std::min(k, f);
    const bool bootstrap = params.bootstrap.value_or(params.mode == ForestMode::BaggedRF);

    TreeParams tp;
    tp.task = params.task;
    tp.max_depth = params.max_depth;
    tp.min_samples_leaf = params.min_samples_leaf;
    tp.features_per_split = k;
    tp.split = params.mode == ForestMode::ExtraTrees ? SplitMode::RandomCut : SplitMode::Exhaustive;
    validate_fit(X, y, tp);
    if (params.task == Task::Classification) count_classes(y);

    ForestModel model;
    model.mode = params.mode;
    model.task = params.task;
    model.features_per_split = k;
    model.seed = params.seed;
    model.trees.resize(static_cast<std::size_t>(params.n_trees));

    auto fit_one = [&](std::size_t i) {
        TreeParams local = tp;
        local.seed = params.seed + i;
        std::vector<std::size_t> sample(X.rows());
        if (bootstrap) {
            // The bootstrap draw uses its own stream so the tree's stream stays aligned
            // with fit_cart for the same seed.
            Rng draw(local.seed ^ 0x9e3779b97f4a7c15ULL);
            for (auto& s : sample) s = draw.index(X.rows());
        } else {
            std::iota(sample.begin(), sample.end(), std::size_t{0});
        }
        model.trees[i] = fit_cart_on(X, y, sample, local);
    };

    unsigned workers = params.threads ? params.threads : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(params.n_trees));
    if (workers <= 1) {
        for (std::size_t i = 0; i < model.trees.size(); ++i) fit_one(i);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (std::size_t i = w; i < model.trees.size(); i += workers) fit_one(i);
            });
    }
    return model;
}

double predict_forest(const ForestModel& model, std::span<const double> x) {
    if (model.trees.empty()) throw Error("forest has no trees");
    if (model.task == Task::Regression) {
        double s = 0.0;
        for (const auto& t : model.trees) s += t.predict(x);
        return s / static_cast<double>(model.trees.size());
    }
    std::vector<std::size_t> votes(std::max<std::size_t>(2, model.trees.front().n_classes), 0);
    for (const auto& t : model.trees) ++votes[static_cast<std::size_t>(t.predict(x))];
    // max_element returns the first maximum, so ties go to the lowest label.
    return static_cast<double>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

nlohmann::json ForestModel::to_json() const {
    nlohmann::json j;
    j["mode"] = mode == ForestMode::BaggedRF ? "bagged_rf" : "extra_trees";
    j["task"] = task == Task::Regression ? "regression" : "classification";
    j["features_per_split"] = features_per_split;
    j["seed"] = seed;
    j["trees"] = nlohmann::json::array();
    for (const auto& t : trees) j["trees"].push_back(t.to_json());
    return j;
}

// ---------------------------------------------------------------------------
// Gradient boosting

BoostedModel fit_gradient_boosting(const Matrix& X, std::span<const double> y, const BoostingParams& params) {
    if (params.n_stages < 1) throw Error("gradient boosting needs at least one stage");
    if (!(params.learning_rate > 0.0 && params.learning_rate <= 1.0))
        throw Error("learning_rate must lie in (0, 1]");
    if (X.rows() == 0) throw Error("cannot fit gradient boosting on empty data");
    if (X.rows() != y.size()) throw Error("feature rows and target length differ");

    BoostedModel model;
    model.learning_rate = params.learning_rate;
    model.initial = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    std::vector<double> fitted(y.size(), model.initial);
    std::vector<double> residual(y.size());

    TreeParams tp;
    tp.task = Task::Regression;
    tp.max_depth = params.max_depth;
    tp.min_samples_leaf = params.min_samples_leaf;
    for (int m = 0; m < params.n_stages; ++m) {
        for (std::size_t i = 0; i < y.size(); ++i) residual[i] = y[i] - fitted[i];
        tp.seed = params.seed + static_cast<std::uint64_t>(m);
        auto tree = fit_cart(X, residual, tp);
        for (std::size_t i = 0; i < y.size(); ++i) fitted[i] += params.learning_rate * tree.predict(X.row(i));
        model.stages.push_back(std::move(tree));
    }
    return model;
}

double predict_boosted(const BoostedModel& model, std::span<const double> x) {
    double f = model.initial;
    for (const auto& t : model.stages) f += model.learning_rate * t.predict(x);
    return f;
}

std::vector<double> staged_predict(const BoostedModel& model, std::span<const double> x) {
    std::vector<double> out{model.initial};
    for (const auto& t : model.stages) out.push_back(out.back() + model.learning_rate * t.predict(x));
    return out;
}

nlohmann::json BoostedModel::to_json() const {
    nlohmann::json j;
    j["initial"] = initial;
    j["learning_rate"] = learning_rate;
    j["stages"] = nlohmann::json::array();
    for (const auto& t : stages) j["stages"].push_back(t.to_json());
    return j;
}

}  // namespace stopcast
