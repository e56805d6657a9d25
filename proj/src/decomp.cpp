#include "treesmooth/decomp.hpp"

#include <algorithm>
#include <cmath>

#include "treesmooth/ensemble.hpp"
#include "treesmooth/rng.hpp"

namespace treesmooth {

namespace {

double col_mean(const Matrix& m, int col) {
    double acc = 0.0;
    for (int i = 0; i < m.rows; ++i) acc += m(i, col);
    return acc / m.rows;
}

double col_var(const Matrix& m, int col) {
    bool constant = true;
    for (int i = 1; i < m.rows && constant; ++i) constant = m(i, col) == m(0, col);
    if (constant) return 0.0;
    const double mean = col_mean(m, col);
    double acc = 0.0;
    for (int i = 0; i < m.rows; ++i) {
        const double diff = m(i, col) - mean;
        acc += diff * diff;
    }
    return acc / (m.rows - 1);
}

}  // namespace

VarianceDecomposition variance_decompose(const FitPredict& model,
                                         const std::function<Dataset(uint64_t)>& data_factory,
                                         const Matrix& query, int outer_reps, int inner_reps,
                                         uint64_t seed) {
    if (outer_reps < 2 || inner_reps < 2)
        throw std::invalid_argument("variance_decompose: needs >= 2 outer and inner reps");
    const int q = query.rows;
    Matrix inner_means(outer_reps, q);
    std::vector<double> within_by_point(q, 0.0);
    Matrix pooled(outer_reps * inner_reps, q);
    for (int o = 0; o < outer_reps; ++o) {
        Dataset z = data_factory(mix_seed(seed, static_cast<uint64_t>(o)));
        Matrix draws(inner_reps, q);
        for (int k = 0; k < inner_reps; ++k) {
            auto preds = model(z, query,
                               mix_seed(seed, 1000003ULL * (o + 1) + static_cast<uint64_t>(k)));
            if (preds.size() != static_cast<size_t>(q))
                throw std::runtime_error("variance_decompose: prediction length mismatch");
            for (int j = 0; j < q; ++j) {
                draws(k, j) = preds[j];
                pooled(o * inner_reps + k, j) = preds[j];
            }
        }
        for (int j = 0; j < q; ++j) {
            inner_means(o, j) = col_mean(draws, j);
            within_by_point[j] += col_var(draws, j);
        }
    }

    VarianceDecomposition out;
    out.outer_reps = outer_reps;
    out.inner_reps = inner_reps;
    double within = 0.0, between_raw = 0.0, total = 0.0;
    for (int j = 0; j < q; ++j) {
        within += within_by_point[j] / outer_reps;
        between_raw += col_var(inner_means, j);
        total += col_var(pooled, j);
    }
    out.within_z_var = within / q;
    out.total_var = total / q;
    out.samp_var = std::max(0.0, between_raw / q - out.within_z_var / inner_reps);
    return out;
}

RepModDecomposition rep_mod_decompose(const FitPredict& model, const Dataset& train,
                                      const Dataset& test, int model_draws, uint64_t seed) {
    if (model_draws < 2)
        throw std::invalid_argument("rep_mod_decompose: needs >= 2 model draws");
    std::vector<std::vector<double>> preds(model_draws);
    std::vector<double> errors(model_draws);
    for (int k = 0; k < model_draws; ++k) {
        preds[k] = model(train, test.inputs, mix_seed(seed, static_cast<uint64_t>(k)));
        errors[k] = mse(preds[k], test.outcomes);
    }
    RepModDecomposition out;
    out.model_draws = model_draws;
    out.best_draw = 0;
    for (int k = 1; k < model_draws; ++k)
        if (errors[k] < errors[out.best_draw]) out.best_draw = k;
    double total_error = 0.0, total_spread = 0.0;
    for (int k = 0; k < model_draws; ++k) {
        total_error += errors[k];
        total_spread += mse(preds[k], preds[out.best_draw]);
    }
    out.mean_mse = total_error / model_draws;
    out.rep_bias_proxy = errors[out.best_draw];
    out.mod_var_proxy = total_spread / model_draws;
    return out;
}

EmseBoundCheck emse_bound_check(std::span<const RepModDecomposition> family,
                                double emse_estimate, double emse_se) {
    EmseBoundCheck out;
    out.emse = emse_estimate;
    if (family.size() < 2) {
        out.sufficient = false;
        return out;
    }
    out.sufficient = true;
    const int z = static_cast<int>(family.size());
    double mean = 0.0;
    for (const auto& rep : family) mean += 2.0 * (rep.rep_bias_proxy + rep.mod_var_proxy);
    mean /= z;
    double var = 0.0;
    for (const auto& rep : family) {
        const double diff = 2.0 * (rep.rep_bias_proxy + rep.mod_var_proxy) - mean;
        var += diff * diff;
    }
    var /= (z - 1);
    out.bound_mean = mean;
    out.bound_se = std::sqrt(var / z);
    const double combined_se = std::sqrt(out.bound_se * out.bound_se + emse_se * emse_se);
    out.margin = mean + 3.0 * combined_se - emse_estimate;
    out.holds = out.margin >= 0.0;
    return out;
}

std::vector<PredictiveVarianceRecord> predictive_variance_experiment(
    SmootherVariant variant, std::span<const int> leaf_grid, std::span<const int> ensemble_grid,
    const Dataset& data, const MeanFn& mean_fn, NoiseSpec noise, const Matrix& test_inputs,
    double feature_fraction, int resamples, uint64_t seed) {
    if (noise.sigma <= 0.0)
        throw std::invalid_argument("predictive_variance_experiment: sigma must be > 0");
    if (resamples < 2)
        throw std::invalid_argument("predictive_variance_experiment: needs >= 2 resamples");

    const int n = data.sample_count();
    const int q = test_inputs.rows;
    const double sigma_sq = noise.sigma * noise.sigma;
    std::vector<PredictiveVarianceRecord> records;

    for (size_t li = 0; li < leaf_grid.size(); ++li) {
        for (size_t bi = 0; bi < ensemble_grid.size(); ++bi) {
            const int max_leaves = leaf_grid[li];
            const int tree_count = ensemble_grid[bi];
            const uint64_t cell_seed = mix_seed(seed, 7919ULL * (li + 1) + bi);

            ForestConfig config;
            config.tree_count = tree_count;
            config.bootstrap = false;
            config.seed = cell_seed;
            config.tree.feature_fraction = feature_fraction;
            if (max_leaves > 0) config.tree.max_leaves = max_leaves;

            // Frozen structures are built once per cell from permuted labels
            // and only their leaf values are refit per resample.
            ForestModel frozen_structure;
            if (variant == SmootherVariant::kFrozen) {
                std::vector<TreeModel> trees(tree_count);
                for (int b = 0; b < tree_count; ++b) {
                    TreeConfig tc = config.tree;
                    tc.seed = mix_seed(cell_seed, static_cast<uint64_t>(b));
                    trees[b] = fit_totally_randomized_tree(data, tc);
                }
                frozen_structure = make_forest(std::move(trees), data.outcomes);
            }

            Matrix train_preds(resamples, n), test_preds(resamples, q);
            double norm_train = 0.0, norm_test = 0.0;
            for (int r = 0; r < resamples; ++r) {
                Dataset resampled = resample_labels(
                    data, mean_fn, noise, mix_seed(cell_seed, 100000ULL + r));
                ForestModel forest;
                switch (variant) {
                    case SmootherVariant::kAdaptive: {
                        ForestConfig cfg = config;
                        cfg.seed = mix_seed(cell_seed, 200000ULL + r);
                        forest = fit_forest(resampled, cfg);
                        break;
                    }
                    case SmootherVariant::kTotallyRandomized: {
                        std::vector<TreeModel> trees(tree_count);
                        for (int b = 0; b < tree_count; ++b) {
                            TreeConfig tc = config.tree;
                            tc.seed = mix_seed(cell_seed, 300000ULL + 1000ULL * r + b);
                            trees[b] = fit_totally_randomized_tree(resampled, tc);
                        }
                        forest = make_forest(std::move(trees), resampled.outcomes);
                        break;
                    }
                    case SmootherVariant::kFrozen:
                        forest = refit_forest_leaves(frozen_structure, resampled.outcomes);
                        break;
                }
                for (int i = 0; i < n; ++i) {
                    SmootherWeights w = forest.weights(data.inputs.row(i));
                    train_preds(r, i) = w.dot(forest.outcomes);
                    norm_train += w.squared_norm();
                }
                for (int j = 0; j < q; ++j) {
                    SmootherWeights w = forest.weights(test_inputs.row(j));
                    test_preds(r, j) = w.dot(forest.outcomes);
                    norm_test += w.squared_norm();
                }
            }

            double var_train = 0.0, var_test = 0.0;
            for (int i = 0; i < n; ++i) var_train += col_var(train_preds, i);
            for (int j = 0; j < q; ++j) var_test += col_var(test_preds, j);

            PredictiveVarianceRecord in_rec;
            in_rec.variant = variant;
            in_rec.max_leaves = max_leaves;
            in_rec.tree_count = tree_count;
            in_rec.in_sample = true;
            in_rec.predictive_variance = var_train / n;
            in_rec.weight_norm_variance = norm_train / (static_cast<double>(resamples) * n) * sigma_sq;
            records.push_back(in_rec);

            PredictiveVarianceRecord out_rec = in_rec;
            out_rec.in_sample = false;
            out_rec.predictive_variance = var_test / q;
            out_rec.weight_norm_variance = norm_test / (static_cast<double>(resamples) * q) * sigma_sq;
            records.push_back(out_rec);
        }
    }
    return records;
}

}  // namespace treesmooth
