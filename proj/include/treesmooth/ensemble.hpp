#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "treesmooth/core.hpp"
#include "treesmooth/tree.hpp"

namespace treesmooth {

struct ForestConfig {
    int tree_count = 50;
    bool bootstrap = false;
    TreeConfig tree;  // per-member seeds are derived from `seed`, not tree.seed
    uint64_t seed = 0;
};

/// Uniformly weighted average of tree smoothers. Predictions go through the
/// merged smoother weights (per-index sums over members, divided once by B),
/// so predict(x) == dot(weights(x), y) bitwise.
struct ForestModel {
    std::vector<TreeModel> trees;
    std::vector<double> member_weights;  // uniform 1/B
    std::vector<double> outcomes;        // training labels the forest smooths over

    int tree_count() const { return static_cast<int>(trees.size()); }
    int train_size() const { return static_cast<int>(outcomes.size()); }

    SmootherWeights weights(std::span<const double> x) const;
    double predict(std::span<const double> x) const { return weights(x).dot(outcomes); }
};

ForestModel make_forest(std::vector<TreeModel> trees, std::vector<double> outcomes);

/// Fits tree_count trees with independent derived seeds; with bootstrap on,
/// each member receives multiplicities from resampling n rows with
/// replacement. Member b of a forest is identical for any tree_count >= b+1
/// (same seed), and results do not depend on `threads`.
ForestModel fit_forest(const Dataset& data, const ForestConfig& config, int threads = 1);

/// Leaf values of every member recomputed from new outcomes; structures and
/// smoother weights unchanged.
ForestModel refit_forest_leaves(const ForestModel& forest, std::span<const double> new_outcomes);

struct BoostConfig {
    int rounds = 100;
    double learning_rate = 0.05;
    TreeConfig tree;
    uint64_t seed = 0;
};

struct BoostStage {
    TreeModel tree;                  // fitted on residuals; leaf values are the stage steps
    std::vector<double> correction;  // leaf_count x n row-major residualization matrix
};

/// Gradient-boosted regression trees under squared loss, tracking the
/// smoother weights of the boosted predictor alongside the staged fit.
/// Stage p updates s <- s + eta * (tree_weights_p - correction_p[leaf]),
/// where correction row j is the multiplicity-weighted average of the
/// previous-stage training-row weights over leaf j. Boosted weights may be
/// negative and do not sum to 1.
struct BoostModel {
    std::vector<BoostStage> stages;
    Matrix train_weights;  // n x n; row i = smoother weights at training row i
    std::vector<double> outcomes;
    double learning_rate = 0.0;
    int feature_count = 0;

    int rounds() const { return static_cast<int>(stages.size()); }
    int train_size() const { return static_cast<int>(outcomes.size()); }

    /// Staged prediction sum(eta * leaf value) over the first `rounds` stages
    /// (all stages when rounds < 0). Independent arithmetic from weights().
    double predict(std::span<const double> x, int rounds = -1) const;

    /// Smoother weights at x via the stage recursion.
    SmootherWeights weights(std::span<const double> x, int rounds = -1) const;

    /// Cached final-stage weights for training row i (bitwise equal to
    /// weights(x_i) evaluated at the full round count).
    SmootherWeights train_row_weights(int i) const;
};

BoostModel fit_boost(const Dataset& data, const BoostConfig& config);

/// Per-query squared weight norms and predictions for nested ensembles.
/// stats[c][j] corresponds to checkpoint c (an ensemble size or round count,
/// ascending) and query row j.
struct PrefixStats {
    std::vector<std::vector<double>> squared_norms;
    std::vector<std::vector<double>> predictions;
};

/// Evaluates every query against the forests formed by the first
/// `checkpoints[c]` trees. Values are bitwise identical to fitting a forest
/// of that size with the same member seeds and querying it directly.
PrefixStats forest_prefix_stats(const std::vector<TreeModel>& trees,
                                std::span<const double> outcomes, const Matrix& queries,
                                std::span<const int> checkpoints);

/// Same for a boosted model truncated at `checkpoints[c]` rounds.
PrefixStats boost_prefix_stats(const BoostModel& model, const Matrix& queries,
                               std::span<const int> checkpoints);

}  // namespace treesmooth
