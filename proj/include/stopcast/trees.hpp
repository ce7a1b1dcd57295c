#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "stopcast/features.hpp"

namespace stopcast {

/// Dense row-major matrix of feature values.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
    static Matrix from_features(const FeatureMatrix& m);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

enum class Task { Regression, Classification };
enum class SplitMode { Exhaustive, RandomCut };

struct TreeParams {
    Task task = Task::Regression;
    int max_depth = 12;  // <= 0 means unbounded
    int min_samples_leaf = 3;
    int features_per_split = 0;  // <= 0 means all features
    SplitMode split = SplitMode::Exhaustive;
    std::uint64_t seed = 0;
};

struct TreeNode {
    int feature = -1;  // -1 for leaves
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    /// Leaf mean (regression) or majority label (classification).
    double value = 0.0;
    std::vector<std::int64_t> class_counts;
    std::size_t samples = 0;

    bool is_leaf() const { return feature < 0; }
    bool operator==(const TreeNode&) const = default;
};

/// A fitted CART tree stored as a flat node array; node 0 is the root. Samples with
/// x[feature] <= threshold go left.
class DecisionTree {
public:
    Task task = Task::Regression;
    std::size_t n_features = 0;
    std::size_t n_classes = 0;
    std::vector<TreeNode> nodes;

    /// Leaf mean, or the predicted class label. Throws Error when x is too short.
    double predict(std::span<const double> x) const;
    const TreeNode& leaf_for(std::span<const double> x) const;
    int depth() const;
    std::size_t leaves() const;

    nlohmann::json to_json() const;
    static DecisionTree from_json(const nlohmann::json& j);
    bool operator==(const DecisionTree&) const = default;
};

/// Greedy recursive partitioning. Regression minimises squared error, classification
/// Gini impurity. Ties in the criterion go to the lowest feature index, then the lowest
/// threshold. Classification labels must be 0..K-1.
DecisionTree fit_cart(const Matrix& X, std::span<const double> y, const TreeParams& params);

/// Same as fit_cart on the rows listed in `sample` (repeats allowed).
DecisionTree fit_cart_on(const Matrix& X, std::span<const double> y, std::span<const std::size_t> sample,
                         const TreeParams& params);

double predict_cart(const DecisionTree& tree, std::span<const double> x);

// ---------------------------------------------------------------------------

enum class ForestMode { BaggedRF, ExtraTrees };

struct ForestParams {
    int n_trees = 200;
    ForestMode mode = ForestMode::BaggedRF;
    Task task = Task::Regression;
    int max_depth = 12;
    int min_samples_leaf = 3;
    /// <= 0 picks the mode default: ceil(sqrt(f)) for bagged forests, all for extra trees.
    int features_per_split = 0;
    /// Bootstrap resampling; defaults to on for bagged forests and off for extra trees.
    std::optional<bool> bootstrap;
    std::uint64_t seed = 0;
    /// Worker threads; 0 uses the hardware concurrency.
    unsigned threads = 0;
};

struct ForestModel {
    std::vector<DecisionTree> trees;
    ForestMode mode = ForestMode::BaggedRF;
    Task task = Task::Regression;
    int features_per_split = 0;
    std::uint64_t seed = 0;

    nlohmann::json to_json() const;
    bool operator==(const ForestModel&) const = default;
};

/// Tree i draws its randomness from seed + i, so results do not depend on scheduling.
ForestModel fit_forest(const Matrix& X, std::span<const double> y, const ForestParams& params);

/// Mean of tree outputs, or a majority vote with ties going to class 0.
double predict_forest(const ForestModel& model, std::span<const double> x);

// ---------------------------------------------------------------------------

struct BoostingParams {
    int n_stages = 100;
    double learning_rate = 0.1;
    int max_depth = 3;
    int min_samples_leaf = 3;
    std::uint64_t seed = 0;
};

struct BoostedModel {
    double initial = 0.0;
    double learning_rate = 0.1;
    std::vector<DecisionTree> stages;

    nlohmann::json to_json() const;
    bool operator==(const BoostedModel&) const = default;
};

/// Squared-error gradient boosting: F_0 = mean(y), stage m fits a regression tree to
/// y - F_{m-1}(X) and F_m = F_{m-1} + learning_rate * tree_m.
BoostedModel fit_gradient_boosting(const Matrix& X, std::span<const double> y, const BoostingParams& params);

double predict_boosted(const BoostedModel& model, std::span<const double> x);
/// Prediction after each of the first `stages` stages: element m is F_m(x), m = 0..stages.
std::vector<double> staged_predict(const BoostedModel& model, std::span<const double> x);

}  // namespace stopcast
