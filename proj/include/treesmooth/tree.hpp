#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "treesmooth/core.hpp"

namespace treesmooth {

struct TreeConfig {
    /// Fraction of features considered at each split; each node draws
    /// max(1, round(feature_fraction * d)) candidates in a fresh random order.
    double feature_fraction = 1.0;
    std::optional<int> max_leaves;
    std::optional<int> max_depth;
    int min_samples_split = 2;
    uint64_t seed = 0;
};

struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int leaf = -1;  // >= 0 marks a terminal node
};

struct TreeLeaf {
    std::vector<int> members;      // training indices with positive multiplicity, ascending
    std::vector<double> weights;   // multiplicity / total leaf multiplicity, aligned to members
    double value = 0.0;            // dot(weights, y_train) accumulated in member order
};

/// A fitted axis-aligned binary regression tree. Terminal predictions are
/// multiplicity-weighted label means; leaf weight vectors expose the tree as
/// a smoother over the training labels. Immutable once fitted.
struct TreeModel {
    std::vector<TreeNode> nodes;
    std::vector<TreeLeaf> leaves;
    std::vector<int> row_multiplicity;  // length n; all 1 when fit without bootstrap
    int depth = 0;
    int feature_count = 0;
    int sample_count = 0;

    int leaf_of(std::span<const double> x) const {
        int node = 0;
        while (nodes[node].leaf < 0) {
            const TreeNode& s = nodes[node];
            node = x[s.feature] <= s.threshold ? s.left : s.right;
        }
        return nodes[node].leaf;
    }

    double predict(std::span<const double> x) const { return leaves[leaf_of(x)].value; }

    SmootherWeights weights(std::span<const double> x) const {
        const TreeLeaf& leaf = leaves[leaf_of(x)];
        SmootherWeights w;
        w.train_size = sample_count;
        w.entries.reserve(leaf.members.size());
        for (size_t k = 0; k < leaf.members.size(); ++k)
            w.entries.emplace_back(leaf.members[k], leaf.weights[k]);
        return w;
    }

    int leaf_count() const { return static_cast<int>(leaves.size()); }
};

/// Greedy least-squares tree induction. Growth is best-first: the frontier
/// node whose best split yields the largest impurity decrease is expanded
/// next, which makes `max_leaves` well defined. At each node a random subset
/// of features is drawn in random order and ties in impurity decrease go to
/// the feature seen first in that order. Rows with zero multiplicity take no
/// part in fitting and belong to no leaf.
TreeModel fit_tree(const Dataset& data, const TreeConfig& config,
                   std::span<const int> sample_multiplicity = {});

/// Builds the tree structure on a seeded permutation of the outcomes, then
/// recomputes leaf values from the true outcomes. The resulting smoother's
/// structure carries no information about the actual labels.
TreeModel fit_totally_randomized_tree(const Dataset& data, const TreeConfig& config);

/// Same structure and leaf memberships, leaf values recomputed as
/// multiplicity-weighted means of new_outcomes.
TreeModel refit_leaves(const TreeModel& tree, std::span<const double> new_outcomes);

}  // namespace treesmooth
