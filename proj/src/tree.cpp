#include "treesmooth/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <random>

#include "treesmooth/rng.hpp"

namespace treesmooth {

namespace {

struct SplitChoice {
    int feature = -1;
    double threshold = 0.0;
    double gain = -1.0;  // decrease in multiplicity-weighted SSE
};

// A frontier node awaiting expansion (or finalization as a leaf).
struct BuildNode {
    int node_index = -1;
    int depth = 0;
    std::vector<int> rows;  // training indices with positive multiplicity
    double weight_total = 0.0;
    double weighted_sum = 0.0;
    SplitChoice split;  // feature < 0 when the node cannot be split
};

struct Frontier {
    double gain;
    uint64_t order;  // creation counter; earlier nodes win gain ties
    int build_index;
};

struct FrontierLess {
    bool operator()(const Frontier& a, const Frontier& b) const {
        if (a.gain != b.gain) return a.gain < b.gain;
        return a.order > b.order;
    }
};

class TreeBuilder {
  public:
    TreeBuilder(const Dataset& data, const TreeConfig& config, std::span<const int> multiplicity)
        : data_(data), config_(config), rng_(make_rng(config.seed)) {
        const int n = data.sample_count();
        const int d = data.feature_count();
        if (config.feature_fraction <= 0.0 || config.feature_fraction > 1.0)
            throw std::invalid_argument("fit_tree: feature_fraction must be in (0, 1]");
        if (config.max_leaves && *config.max_leaves < 1)
            throw std::invalid_argument("fit_tree: max_leaves must be >= 1");
        if (config.min_samples_split < 2)
            throw std::invalid_argument("fit_tree: min_samples_split must be >= 2");
        if (n == 0) throw std::invalid_argument("fit_tree: empty dataset");
        if (!multiplicity.empty() && multiplicity.size() != static_cast<size_t>(n))
            throw std::invalid_argument("fit_tree: multiplicity length mismatch");

        model_.feature_count = d;
        model_.sample_count = n;
        model_.row_multiplicity.assign(n, 1);
        if (!multiplicity.empty()) {
            long total = 0;
            for (int i = 0; i < n; ++i) {
                if (multiplicity[i] < 0)
                    throw std::invalid_argument("fit_tree: negative multiplicity");
                model_.row_multiplicity[i] = multiplicity[i];
                total += multiplicity[i];
            }
            if (total == 0) throw std::invalid_argument("fit_tree: empty effective sample");
        }
        p_try_ = std::max(1, static_cast<int>(std::lround(config.feature_fraction * d)));
        p_try_ = std::min(p_try_, d);
        feature_order_.resize(d);
        std::iota(feature_order_.begin(), feature_order_.end(), 0);
    }

    TreeModel build() {
        BuildNode root;
        root.node_index = new_node();
        root.depth = 0;
        const int n = data_.sample_count();
        root.rows.reserve(n);
        for (int i = 0; i < n; ++i)
            if (model_.row_multiplicity[i] > 0) root.rows.push_back(i);
        node_stats(root);
        prepare(root);

        std::priority_queue<Frontier, std::vector<Frontier>, FrontierLess> frontier;
        int pending = enqueue(frontier, std::move(root));
        // pending counts queue entries; every other created node is already a
        // materialized leaf, so the would-be leaf count is leaves + pending.
        while (pending > 0) {
            if (config_.max_leaves &&
                static_cast<int>(model_.leaves.size()) + pending >= *config_.max_leaves)
                break;
            Frontier top = frontier.top();
            frontier.pop();
            --pending;
            BuildNode node = std::move(builds_[top.build_index]);

            auto [left_rows, right_rows] = partition(node);
            TreeNode& split_node = model_.nodes[node.node_index];
            split_node.feature = node.split.feature;
            split_node.threshold = node.split.threshold;

            BuildNode left, right;
            left.node_index = new_node();
            right.node_index = new_node();
            model_.nodes[node.node_index].left = left.node_index;
            model_.nodes[node.node_index].right = right.node_index;
            left.depth = right.depth = node.depth + 1;
            left.rows = std::move(left_rows);
            right.rows = std::move(right_rows);
            node_stats(left);
            node_stats(right);
            prepare(left);
            prepare(right);
            pending += enqueue(frontier, std::move(left));
            pending += enqueue(frontier, std::move(right));
        }
        while (!frontier.empty()) {
            Frontier top = frontier.top();
            frontier.pop();
            make_leaf(builds_[top.build_index]);
        }
        return std::move(model_);
    }

  private:
    int new_node() {
        model_.nodes.emplace_back();
        return static_cast<int>(model_.nodes.size()) - 1;
    }

    void node_stats(BuildNode& node) const {
        double w = 0.0, s = 0.0;
        for (int r : node.rows) {
            double c = model_.row_multiplicity[r];
            w += c;
            s += c * data_.outcomes[r];
        }
        node.weight_total = w;
        node.weighted_sum = s;
    }

    bool is_pure(const BuildNode& node) const {
        double first = data_.outcomes[node.rows.front()];
        for (int r : node.rows)
            if (data_.outcomes[r] != first) return false;
        return true;
    }

    // Decides whether the node is expandable and, if so, finds its best split.
    void prepare(BuildNode& node) {
        node.split = SplitChoice{};
        if (static_cast<int>(node.rows.size()) < 2) return;
        if (node.weight_total < config_.min_samples_split) return;
        if (config_.max_depth && node.depth >= *config_.max_depth) return;
        if (is_pure(node)) return;
        node.split = best_split(node);
    }

    SplitChoice best_split(const BuildNode& node) {
        std::shuffle(feature_order_.begin(), feature_order_.end(), rng_);
        SplitChoice best;
        const double parent_term = node.weighted_sum * node.weighted_sum / node.weight_total;
        auto& vals = scratch_;
        for (int k = 0; k < p_try_; ++k) {
            const int f = feature_order_[k];
            vals.clear();
            for (int r : node.rows)
                vals.push_back({data_.inputs(r, f), data_.outcomes[r],
                                static_cast<double>(model_.row_multiplicity[r])});
            std::sort(vals.begin(), vals.end(),
                      [](const Sample& a, const Sample& b) { return a.value < b.value; });
            double left_w = 0.0, left_s = 0.0;
            for (size_t i = 0; i + 1 < vals.size(); ++i) {
                left_w += vals[i].count;
                left_s += vals[i].count * vals[i].outcome;
                if (vals[i].value == vals[i + 1].value) continue;
                const double right_w = node.weight_total - left_w;
                const double right_s = node.weighted_sum - left_s;
                const double gain =
                    left_s * left_s / left_w + right_s * right_s / right_w - parent_term;
                if (gain > best.gain) {
                    double threshold = (vals[i].value + vals[i + 1].value) / 2.0;
                    if (threshold == vals[i + 1].value) threshold = vals[i].value;
                    best.gain = gain;
                    best.feature = f;
                    best.threshold = threshold;
                }
            }
        }
        return best;
    }

    std::pair<std::vector<int>, std::vector<int>> partition(const BuildNode& node) const {
        std::vector<int> left, right;
        for (int r : node.rows) {
            if (data_.inputs(r, node.split.feature) <= node.split.threshold)
                left.push_back(r);
            else
                right.push_back(r);
        }
        return {std::move(left), std::move(right)};
    }

    // Pushes a splittable node onto the frontier (returning 1) or finalizes
    // it as a leaf (returning 0).
    template <class Queue>
    int enqueue(Queue& frontier, BuildNode&& node) {
        model_.depth = std::max(model_.depth, node.depth);
        if (node.split.feature < 0) {
            make_leaf(node);
            return 0;
        }
        builds_.push_back(std::move(node));
        frontier.push(
            Frontier{builds_.back().split.gain, order_++, static_cast<int>(builds_.size()) - 1});
        return 1;
    }

    void make_leaf(BuildNode& node) {
        TreeLeaf leaf;
        leaf.members = std::move(node.rows);
        std::sort(leaf.members.begin(), leaf.members.end());
        leaf.weights.resize(leaf.members.size());
        for (size_t k = 0; k < leaf.members.size(); ++k)
            leaf.weights[k] = model_.row_multiplicity[leaf.members[k]] / node.weight_total;
        double value = 0.0;
        for (size_t k = 0; k < leaf.members.size(); ++k)
            value += leaf.weights[k] * data_.outcomes[leaf.members[k]];
        leaf.value = value;
        model_.nodes[node.node_index].leaf = static_cast<int>(model_.leaves.size());
        model_.leaves.push_back(std::move(leaf));
    }

    struct Sample {
        double value;
        double outcome;
        double count;
    };

    const Dataset& data_;
    const TreeConfig& config_;
    std::mt19937_64 rng_;
    TreeModel model_;
    std::vector<int> feature_order_;
    std::vector<BuildNode> builds_;
    std::vector<Sample> scratch_;
    int p_try_ = 1;
    uint64_t order_ = 0;
};

}  // namespace

TreeModel fit_tree(const Dataset& data, const TreeConfig& config,
                   std::span<const int> sample_multiplicity) {
    data.validate();
    TreeBuilder builder(data, config, sample_multiplicity);
    return builder.build();
}

TreeModel fit_totally_randomized_tree(const Dataset& data, const TreeConfig& config) {
    Dataset shuffled;
    shuffled.inputs = data.inputs;
    shuffled.task = data.task;
    shuffled.outcomes = data.outcomes;
    auto rng = make_rng(mix_seed(config.seed, 0x7052));
    std::shuffle(shuffled.outcomes.begin(), shuffled.outcomes.end(), rng);
    TreeConfig structure_config = config;
    structure_config.seed = mix_seed(config.seed, 0x7153);
    TreeModel structure = fit_tree(shuffled, structure_config);
    return refit_leaves(structure, data.outcomes);
}

TreeModel refit_leaves(const TreeModel& tree, std::span<const double> new_outcomes) {
    if (new_outcomes.size() != static_cast<size_t>(tree.sample_count))
        throw std::invalid_argument("refit_leaves: outcome length mismatch");
    TreeModel out = tree;
    for (TreeLeaf& leaf : out.leaves) {
        double value = 0.0;
        for (size_t k = 0; k < leaf.members.size(); ++k)
            value += leaf.weights[k] * new_outcomes[leaf.members[k]];
        leaf.value = value;
    }
    return out;
}

}  // namespace treesmooth
