#include "treesmooth/ensemble.hpp"

#include <algorithm>
#include <random>

#include "treesmooth/parallel.hpp"
#include "treesmooth/rng.hpp"

namespace treesmooth {

SmootherWeights ForestModel::weights(std::span<const double> x) const {
    const int n = train_size();
    std::vector<double> acc(n, 0.0);
    for (const TreeModel& tree : trees) {
        const TreeLeaf& leaf = tree.leaves[tree.leaf_of(x)];
        for (size_t k = 0; k < leaf.members.size(); ++k)
            acc[leaf.members[k]] += leaf.weights[k];
    }
    const double count = static_cast<double>(tree_count());
    SmootherWeights w;
    w.train_size = n;
    for (int i = 0; i < n; ++i)
        if (acc[i] != 0.0) w.entries.emplace_back(i, acc[i] / count);
    return w;
}

ForestModel make_forest(std::vector<TreeModel> trees, std::vector<double> outcomes) {
    if (trees.empty()) throw std::invalid_argument("make_forest: needs at least one tree");
    ForestModel forest;
    forest.member_weights.assign(trees.size(), 1.0 / static_cast<double>(trees.size()));
    forest.trees = std::move(trees);
    forest.outcomes = std::move(outcomes);
    return forest;
}

ForestModel fit_forest(const Dataset& data, const ForestConfig& config, int threads) {
    if (config.tree_count < 1) throw std::invalid_argument("fit_forest: tree_count must be >= 1");
    data.validate();
    const int n = data.sample_count();
    std::vector<TreeModel> trees(config.tree_count);
    parallel_for(config.tree_count, threads, [&](int b) {
        TreeConfig tree_config = config.tree;
        tree_config.seed = mix_seed(config.seed, 2 * static_cast<uint64_t>(b) + 1);
        if (config.bootstrap) {
            std::vector<int> multiplicity(n, 0);
            auto rng = make_rng(mix_seed(config.seed, 2 * static_cast<uint64_t>(b)));
            std::uniform_int_distribution<int> pick(0, n - 1);
            for (int i = 0; i < n; ++i) ++multiplicity[pick(rng)];
            trees[b] = fit_tree(data, tree_config, multiplicity);
        } else {
            trees[b] = fit_tree(data, tree_config);
        }
    });
    return make_forest(std::move(trees), data.outcomes);
}

ForestModel refit_forest_leaves(const ForestModel& forest, std::span<const double> new_outcomes) {
    ForestModel out;
    out.member_weights = forest.member_weights;
    out.outcomes.assign(new_outcomes.begin(), new_outcomes.end());
    out.trees.reserve(forest.trees.size());
    for (const TreeModel& tree : forest.trees)
        out.trees.push_back(refit_leaves(tree, new_outcomes));
    return out;
}

namespace {

// Single shared arithmetic path for the stage update of a dense weight
// vector; used both when caching training-row weights during fitting and
// when reconstructing weights for a query, so the two agree bitwise.
void apply_stage(std::span<double> weights, const BoostStage& stage, int leaf,
                 double learning_rate) {
    const TreeLeaf& lf = stage.tree.leaves[leaf];
    const double* corr = stage.correction.data() + static_cast<size_t>(leaf) * weights.size();
    size_t k = 0;
    for (size_t i = 0; i < weights.size(); ++i) {
        double tw = 0.0;
        if (k < lf.members.size() && lf.members[k] == static_cast<int>(i)) {
            tw = lf.weights[k];
            ++k;
        }
        weights[i] += learning_rate * (tw - corr[i]);
    }
}

SmootherWeights compress(const std::vector<double>& dense) {
    SmootherWeights w;
    w.train_size = static_cast<int>(dense.size());
    for (size_t i = 0; i < dense.size(); ++i)
        if (dense[i] != 0.0) w.entries.emplace_back(static_cast<int>(i), dense[i]);
    return w;
}

}  // namespace

double BoostModel::predict(std::span<const double> x, int rounds_limit) const {
    int limit = rounds_limit < 0 ? rounds() : std::min(rounds_limit, rounds());
    double f = 0.0;
    for (int p = 0; p < limit; ++p)
        f += learning_rate * stages[p].tree.predict(x);
    return f;
}

SmootherWeights BoostModel::weights(std::span<const double> x, int rounds_limit) const {
    int limit = rounds_limit < 0 ? rounds() : std::min(rounds_limit, rounds());
    std::vector<double> dense(train_size(), 0.0);
    for (int p = 0; p < limit; ++p)
        apply_stage(dense, stages[p], stages[p].tree.leaf_of(x), learning_rate);
    return compress(dense);
}

SmootherWeights BoostModel::train_row_weights(int i) const {
    SmootherWeights w;
    w.train_size = train_size();
    for (int j = 0; j < train_weights.cols; ++j)
        if (train_weights(i, j) != 0.0) w.entries.emplace_back(j, train_weights(i, j));
    return w;
}

PrefixStats forest_prefix_stats(const std::vector<TreeModel>& trees,
                                std::span<const double> outcomes, const Matrix& queries,
                                std::span<const int> checkpoints) {
    const int n = static_cast<int>(outcomes.size());
    PrefixStats stats;
    stats.squared_norms.assign(checkpoints.size(), std::vector<double>(queries.rows));
    stats.predictions.assign(checkpoints.size(), std::vector<double>(queries.rows));
    std::vector<double> acc(n);
    for (int j = 0; j < queries.rows; ++j) {
        std::fill(acc.begin(), acc.end(), 0.0);
        auto x = queries.row(j);
        size_t c = 0;
        for (size_t b = 0; b < trees.size() && c < checkpoints.size(); ++b) {
            const TreeLeaf& leaf = trees[b].leaves[trees[b].leaf_of(x)];
            for (size_t k = 0; k < leaf.members.size(); ++k)
                acc[leaf.members[k]] += leaf.weights[k];
            while (c < checkpoints.size() && checkpoints[c] == static_cast<int>(b) + 1) {
                const double count = static_cast<double>(checkpoints[c]);
                double norm = 0.0, pred = 0.0;
                for (int i = 0; i < n; ++i) {
                    if (acc[i] == 0.0) continue;
                    const double w = acc[i] / count;
                    norm += w * w;
                    pred += w * outcomes[i];
                }
                stats.squared_norms[c][j] = norm;
                stats.predictions[c][j] = pred;
                ++c;
            }
        }
        if (c < checkpoints.size())
            throw std::invalid_argument("forest_prefix_stats: checkpoint beyond tree count");
    }
    return stats;
}

PrefixStats boost_prefix_stats(const BoostModel& model, const Matrix& queries,
                               std::span<const int> checkpoints) {
    const int n = model.train_size();
    PrefixStats stats;
    stats.squared_norms.assign(checkpoints.size(), std::vector<double>(queries.rows));
    stats.predictions.assign(checkpoints.size(), std::vector<double>(queries.rows));
    std::vector<double> dense(n);
    for (int j = 0; j < queries.rows; ++j) {
        std::fill(dense.begin(), dense.end(), 0.0);
        auto x = queries.row(j);
        size_t c = 0;
        // A checkpoint of 0 reports the all-zero initial smoother.
        while (c < checkpoints.size() && checkpoints[c] == 0) {
            stats.squared_norms[c][j] = 0.0;
            stats.predictions[c][j] = 0.0;
            ++c;
        }
        for (int p = 0; p < model.rounds() && c < checkpoints.size(); ++p) {
            const BoostStage& stage = model.stages[p];
            apply_stage(dense, stage, stage.tree.leaf_of(x), model.learning_rate);
            while (c < checkpoints.size() && checkpoints[c] == p + 1) {
                double norm = 0.0, pred = 0.0;
                for (int i = 0; i < n; ++i) {
                    if (dense[i] == 0.0) continue;
                    norm += dense[i] * dense[i];
                    pred += dense[i] * model.outcomes[i];
                }
                stats.squared_norms[c][j] = norm;
                stats.predictions[c][j] = pred;
                ++c;
            }
        }
        if (c < checkpoints.size())
            throw std::invalid_argument("boost_prefix_stats: checkpoint beyond round count");
    }
    return stats;
}

BoostModel fit_boost(const Dataset& data, const BoostConfig& config) {
    if (data.task != Task::kRegression)
        throw std::invalid_argument("fit_boost: regression task required");
    if (config.rounds < 0) throw std::invalid_argument("fit_boost: rounds must be >= 0");
    if (config.learning_rate <= 0.0 || config.learning_rate > 1.0)
        throw std::invalid_argument("fit_boost: learning_rate must be in (0, 1]");
    data.validate();

    const int n = data.sample_count();
    const double eta = config.learning_rate;
    BoostModel model;
    model.learning_rate = eta;
    model.feature_count = data.feature_count();
    model.outcomes = data.outcomes;
    model.train_weights = Matrix(n, n, 0.0);
    model.stages.reserve(config.rounds);

    std::vector<double> staged(n, 0.0);  // running boosted prediction at each training row
    std::vector<double> residual(n);
    Dataset stage_data;
    stage_data.inputs = data.inputs;
    stage_data.task = Task::kRegression;

    std::vector<int> row_leaf(n);

    for (int p = 0; p < config.rounds; ++p) {
        for (int i = 0; i < n; ++i) residual[i] = data.outcomes[i] - staged[i];
        stage_data.outcomes = residual;
        TreeConfig tree_config = config.tree;
        tree_config.seed = mix_seed(config.seed, static_cast<uint64_t>(p));
        BoostStage stage;
        stage.tree = fit_tree(stage_data, tree_config);

        const int leaf_count = stage.tree.leaf_count();
        for (int j = 0; j < leaf_count; ++j) {
            const TreeLeaf& lf = stage.tree.leaves[j];
            for (size_t k = 0; k < lf.members.size(); ++k) row_leaf[lf.members[k]] = j;
        }

        // Correction row j: multiplicity-weighted mean of the previous-stage
        // training-row weight vectors over leaf j.
        stage.correction.assign(static_cast<size_t>(leaf_count) * n, 0.0);
        for (int j = 0; j < leaf_count; ++j) {
            const TreeLeaf& lf = stage.tree.leaves[j];
            double* corr = stage.correction.data() + static_cast<size_t>(j) * n;
            for (size_t k = 0; k < lf.members.size(); ++k) {
                const double w = lf.weights[k];
                const double* prev = &model.train_weights(lf.members[k], 0);
                for (int t = 0; t < n; ++t) corr[t] += w * prev[t];
            }
        }

        for (int i = 0; i < n; ++i) {
            std::span<double> row(&model.train_weights(i, 0), static_cast<size_t>(n));
            apply_stage(row, stage, row_leaf[i], eta);
            staged[i] += eta * stage.tree.leaves[row_leaf[i]].value;
        }
        model.stages.push_back(std::move(stage));
    }
    return model;
}

}  // namespace treesmooth
