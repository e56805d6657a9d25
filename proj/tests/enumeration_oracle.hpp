#pragma once

// Test-only oracle: enumerates every tree realizable by the greedy builder
// under all tie-break orderings of the candidate features (full feature set,
// no subsampling, no bootstrap, no size limits). Mirrors the builder's split
// arithmetic exactly: midpoint thresholds with the collapse guard, strict
// improvement within a feature (lowest qualifying threshold wins), and
// branching over every feature whose best gain equals the global maximum.
// Intended for tiny instances only (n <= ~8, d <= ~3).

#include <memory>
#include <span>
#include <vector>

#include "treesmooth/core.hpp"

namespace treesmooth::testing {

struct EnumeratedNode {
    int feature = -1;
    double threshold = 0.0;
    std::unique_ptr<EnumeratedNode> left, right;
    std::vector<int> members;  // set when terminal, ascending
    double value = 0.0;

    double predict(std::span<const double> x) const {
        const EnumeratedNode* node = this;
        while (node->feature >= 0)
            node = x[node->feature] <= node->threshold ? node->left.get() : node->right.get();
        return node->value;
    }
};

using EnumeratedTree = std::unique_ptr<EnumeratedNode>;

namespace detail {

struct FeatureBest {
    double gain = -1.0;
    double threshold = 0.0;
    bool valid = false;
};

inline EnumeratedTree clone(const EnumeratedTree& tree);

inline FeatureBest feature_best_split(const Dataset& data, const std::vector<int>& rows, int f) {
    std::vector<std::pair<double, double>> vals;  // (x, y)
    for (int r : rows) vals.push_back({data.inputs(r, f), data.outcomes[r]});
    std::sort(vals.begin(), vals.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    double total_s = 0.0;
    for (const auto& v : vals) total_s += v.second;
    const double total_w = static_cast<double>(vals.size());
    const double parent = total_s * total_s / total_w;
    FeatureBest best;
    double left_w = 0.0, left_s = 0.0;
    for (size_t i = 0; i + 1 < vals.size(); ++i) {
        left_w += 1.0;
        left_s += vals[i].second;
        if (vals[i].first == vals[i + 1].first) continue;
        const double right_w = total_w - left_w;
        const double right_s = total_s - left_s;
        const double gain = left_s * left_s / left_w + right_s * right_s / right_w - parent;
        if (!best.valid || gain > best.gain) {
            double threshold = (vals[i].first + vals[i + 1].first) / 2.0;
            if (threshold == vals[i + 1].first) threshold = vals[i].first;
            best.gain = gain;
            best.threshold = threshold;
            best.valid = true;
        }
    }
    return best;
}

inline bool node_is_pure(const Dataset& data, const std::vector<int>& rows) {
    for (int r : rows)
        if (data.outcomes[r] != data.outcomes[rows.front()]) return false;
    return true;
}

inline EnumeratedTree make_terminal(const Dataset& data, std::vector<int> rows) {
    auto node = std::make_unique<EnumeratedNode>();
    node->members = std::move(rows);
    std::sort(node->members.begin(), node->members.end());
    const double w = 1.0 / static_cast<double>(node->members.size());
    double value = 0.0;
    for (int r : node->members) value += w * data.outcomes[r];
    node->value = value;
    return node;
}

inline std::vector<EnumeratedTree> enumerate_from(const Dataset& data, std::vector<int> rows) {
    std::vector<EnumeratedTree> result;
    if (rows.size() < 2 || node_is_pure(data, rows)) {
        result.push_back(make_terminal(data, std::move(rows)));
        return result;
    }
    std::vector<FeatureBest> bests(data.feature_count());
    double max_gain = -1.0;
    bool any_valid = false;
    for (int f = 0; f < data.feature_count(); ++f) {
        bests[f] = feature_best_split(data, rows, f);
        if (bests[f].valid && (!any_valid || bests[f].gain > max_gain)) {
            max_gain = bests[f].gain;
            any_valid = true;
        }
    }
    if (!any_valid) {
        result.push_back(make_terminal(data, std::move(rows)));
        return result;
    }
    for (int f = 0; f < data.feature_count(); ++f) {
        if (!bests[f].valid || bests[f].gain != max_gain) continue;
        std::vector<int> left_rows, right_rows;
        for (int r : rows)
            (data.inputs(r, f) <= bests[f].threshold ? left_rows : right_rows).push_back(r);
        auto lefts = enumerate_from(data, left_rows);
        auto rights = enumerate_from(data, right_rows);
        for (const auto& lt : lefts)
            for (const auto& rt : rights) {
                auto node = std::make_unique<EnumeratedNode>();
                node->feature = f;
                node->threshold = bests[f].threshold;
                node->left = clone(lt);
                node->right = clone(rt);
                result.push_back(std::move(node));
            }
    }
    return result;
}

inline EnumeratedTree clone(const EnumeratedTree& tree) {
    auto node = std::make_unique<EnumeratedNode>();
    node->feature = tree->feature;
    node->threshold = tree->threshold;
    node->members = tree->members;
    node->value = tree->value;
    if (tree->left) node->left = clone(tree->left);
    if (tree->right) node->right = clone(tree->right);
    return node;
}

}  // namespace detail

inline std::vector<EnumeratedTree> enumerate_realizable_trees(const Dataset& data) {
    std::vector<int> rows(data.sample_count());
    for (int i = 0; i < data.sample_count(); ++i) rows[i] = i;
    return detail::enumerate_from(data, std::move(rows));
}

}  // namespace treesmooth::testing
