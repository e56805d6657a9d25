#include "treesmooth/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "treesmooth/datagen.hpp"
#include "treesmooth/decomp.hpp"
#include "treesmooth/ensemble.hpp"
#include "treesmooth/metrics.hpp"
#include "treesmooth/parallel.hpp"
#include "treesmooth/rng.hpp"

namespace treesmooth {

namespace {

using Records = std::vector<ExperimentRecord>;

constexpr int kInputDim = 5;

std::vector<double> grid_or(const ExperimentSpec& spec, const std::string& key,
                            std::vector<double> defaults) {
    auto it = spec.grids.find(key);
    if (it == spec.grids.end() || it->second.empty()) return defaults;
    return it->second;
}

std::vector<int> int_grid_or(const ExperimentSpec& spec, const std::string& key,
                             std::vector<int> defaults) {
    auto it = spec.grids.find(key);
    if (it == spec.grids.end() || it->second.empty()) return defaults;
    std::vector<int> values;
    for (double v : it->second) {
        if (v != std::floor(v))
            throw std::invalid_argument("run_experiment: grid '" + key + "' must be integral");
        values.push_back(static_cast<int>(v));
    }
    return values;
}

int option_int(const ExperimentSpec& spec, const std::string& key, int fallback) {
    auto it = spec.options.find(key);
    if (it == spec.options.end()) return fallback;
    return std::stoi(it->second);
}

std::string option_str(const ExperimentSpec& spec, const std::string& key,
                       const std::string& fallback) {
    auto it = spec.options.find(key);
    return it == spec.options.end() ? fallback : it->second;
}

double marsadd(std::span<const double> x) { return marsadd_mean(x); }

double p0_from_norms(std::span<const double> norms, int train_size) {
    double total = 0.0;
    for (double v : norms) total += v;
    return static_cast<double>(train_size) / norms.size() * total;
}

Records finalize(std::vector<Records> per_rep) {
    Records all;
    for (auto& r : per_rep)
        for (auto& rec : r) all.push_back(std::move(rec));
    std::stable_sort(all.begin(), all.end(),
                     [](const ExperimentRecord& a, const ExperimentRecord& b) {
                         if (a.grid_index != b.grid_index) return a.grid_index < b.grid_index;
                         if (a.replication != b.replication) return a.replication < b.replication;
                         return a.metric < b.metric;
                     });
    return all;
}

struct RecordSink {
    std::string experiment;
    int replication;
    Records* out;

    void add(long grid_index, const HyperPoint& point, const std::string& metric, double value) {
        ExperimentRecord rec;
        rec.experiment = experiment;
        rec.replication = replication;
        rec.point = point;
        rec.metric = metric;
        rec.value = value;
        rec.grid_index = grid_index;
        out->push_back(std::move(rec));
    }
};

ForestConfig forest_config(int tree_count, double m, std::optional<int> max_leaves,
                           bool bootstrap, uint64_t seed) {
    ForestConfig cfg;
    cfg.tree_count = tree_count;
    cfg.bootstrap = bootstrap;
    cfg.seed = seed;
    cfg.tree.feature_fraction = m;
    cfg.tree.max_leaves = max_leaves;
    return cfg;
}

FitPredict forest_factory(int tree_count, double m, std::optional<int> max_leaves,
                          bool bootstrap) {
    return [=](const Dataset& train, const Matrix& query, uint64_t seed) {
        ForestModel forest =
            fit_forest(train, forest_config(tree_count, m, max_leaves, bootstrap, seed));
        std::vector<double> preds(query.rows);
        for (int j = 0; j < query.rows; ++j) preds[j] = forest.predict(query.row(j));
        return preds;
    };
}

// Mean in-sample squared error against freshly resampled outcomes at the
// training inputs, for a model already fitted on the original labels.
double insample_error(std::span<const double> train_predictions, const Dataset& train,
                      const MeanFn& mean_fn, double sigma, int resamples, uint64_t seed) {
    double acc = 0.0;
    for (int r = 0; r < resamples; ++r) {
        Dataset fresh = resample_labels(train, mean_fn, NoiseSpec{sigma},
                                        mix_seed(seed, static_cast<uint64_t>(r)));
        acc += mse(train_predictions, fresh.outcomes);
    }
    return acc / resamples;
}

// ---------------------------------------------------------------------------
// interp-by-m: full-depth forests without bootstrap; smoothing and error by
// ensemble size for different feature fractions.
// ---------------------------------------------------------------------------
Records run_interp_by_m(const ExperimentSpec& spec) {
    auto sigma_grid = grid_or(spec, "sigma", {1.0});
    auto m_grid = grid_or(spec, "m", {1.0 / kInputDim, 1.0 / 3.0, 2.0 / 3.0, 1.0});
    auto b_grid = int_grid_or(spec, "B", {1, 2, 5, 10, 20, 50});
    std::sort(b_grid.begin(), b_grid.end());
    const int b_max = b_grid.back();

    std::vector<Records> per_rep(spec.replications);
    parallel_for(spec.replications, spec.threads, [&](int rep) {
        RecordSink sink{spec.name, rep, &per_rep[rep]};
        const uint64_t rs = mix_seed(spec.base_seed, rep);
        for (size_t si = 0; si < sigma_grid.size(); ++si) {
            const double sigma = sigma_grid[si];
            Dataset train = marsadd_sample(spec.n_train, kInputDim, {sigma}, mix_seed(rs, 11));
            Dataset test = marsadd_sample(spec.n_test, kInputDim, {sigma}, mix_seed(rs, 12));
            for (size_t mi = 0; mi < m_grid.size(); ++mi) {
                ForestModel forest = fit_forest(
                    train, forest_config(b_max, m_grid[mi], std::nullopt, false,
                                         mix_seed(rs, 1000 + 100 * si + mi)));
                auto train_stats =
                    forest_prefix_stats(forest.trees, forest.outcomes, train.inputs, b_grid);
                auto test_stats =
                    forest_prefix_stats(forest.trees, forest.outcomes, test.inputs, b_grid);
                for (size_t bi = 0; bi < b_grid.size(); ++bi) {
                    const long gi =
                        static_cast<long>((si * m_grid.size() + mi) * b_grid.size() + bi);
                    HyperPoint pt;
                    pt.sigma = sigma;
                    pt.feature_fraction = m_grid[mi];
                    pt.tree_count = b_grid[bi];
                    pt.bootstrap = 0;
                    const double p_train =
                        p0_from_norms(train_stats.squared_norms[bi], spec.n_train);
                    const double p_test = p0_from_norms(test_stats.squared_norms[bi], spec.n_train);
                    sink.add(gi, pt, "p_train", p_train);
                    sink.add(gi, pt, "p_test", p_test);
                    sink.add(gi, pt, "k_eff", spec.n_train / p_test);
                    sink.add(gi, pt, "ep_gap", p_train - p_test);
                    sink.add(gi, pt, "mse_train",
                             mse(train_stats.predictions[bi], train.outcomes));
                    sink.add(gi, pt, "mse_test", mse(test_stats.predictions[bi], test.outcomes));
                }
            }
        }
    });
    return finalize(std::move(per_rep));
}

// ---------------------------------------------------------------------------
// depth-sweep: leaf-limited forests (no bootstrap, m = 1/3 by default);
// training fit, smoothing and the train-test gap by ensemble size.
// ---------------------------------------------------------------------------
Records run_depth_sweep(const ExperimentSpec& spec) {
    auto sigma_grid = grid_or(spec, "sigma", {1.0});
    auto m_grid = grid_or(spec, "m", {1.0 / 3.0});
    auto leaves_grid = int_grid_or(spec, "max_leaves", {10, 100, 500});
    auto b_grid = int_grid_or(spec, "B", {1, 2, 5, 10, 20, 50});
    std::sort(b_grid.begin(), b_grid.end());
    const int b_max = b_grid.back();

    std::vector<Records> per_rep(spec.replications);
    parallel_for(spec.replications, spec.threads, [&](int rep) {
        RecordSink sink{spec.name, rep, &per_rep[rep]};
        const uint64_t rs = mix_seed(spec.base_seed, rep);
        for (size_t si = 0; si < sigma_grid.size(); ++si) {
            const double sigma = sigma_grid[si];
            Dataset train = marsadd_sample(spec.n_train, kInputDim, {sigma}, mix_seed(rs, 11));
            Dataset test = marsadd_sample(spec.n_test, kInputDim, {sigma}, mix_seed(rs, 12));
            for (size_t mi = 0; mi < m_grid.size(); ++mi) {
                for (size_t li = 0; li < leaves_grid.size(); ++li) {
                    ForestModel forest = fit_forest(
                        train, forest_config(b_max, m_grid[mi], leaves_grid[li], false,
                                             mix_seed(rs, 2000 + 100 * si + 10 * mi + li)));
                    auto train_stats =
                        forest_prefix_stats(forest.trees, forest.outcomes, train.inputs, b_grid);
                    auto test_stats =
                        forest_prefix_stats(forest.trees, forest.outcomes, test.inputs, b_grid);
                    for (size_t bi = 0; bi < b_grid.size(); ++bi) {
                        const long gi = static_cast<long>(
                            ((si * m_grid.size() + mi) * leaves_grid.size() + li) * b_grid.size() +
                            bi);
                        HyperPoint pt;
                        pt.sigma = sigma;
                        pt.feature_fraction = m_grid[mi];
                        pt.max_leaves = leaves_grid[li];
                        pt.tree_count = b_grid[bi];
                        pt.bootstrap = 0;
                        const double p_train =
                            p0_from_norms(train_stats.squared_norms[bi], spec.n_train);
                        const double p_test =
                            p0_from_norms(test_stats.squared_norms[bi], spec.n_train);
                        sink.add(gi, pt, "p_train", p_train);
                        sink.add(gi, pt, "p_test", p_test);
                        sink.add(gi, pt, "ep_gap", p_train - p_test);
                        sink.add(gi, pt, "mse_train",
                                 mse(train_stats.predictions[bi], train.outcomes));
                        sink.add(gi, pt, "mse_test",
                                 mse(test_stats.predictions[bi], test.outcomes));
                    }
                }
            }
        }
    });
    return finalize(std::move(per_rep));
}

// ---------------------------------------------------------------------------
// boost-by-rounds: gradient boosting; train/test effective parameters diverge
// as rounds accumulate.
// ---------------------------------------------------------------------------
Records run_boost_by_rounds(const ExperimentSpec& spec) {
    auto sigma_grid = grid_or(spec, "sigma", {1.0});
    auto eta_grid = grid_or(spec, "eta", {0.05});
    auto leaves_grid = int_grid_or(spec, "max_leaves", {8, 32});
    auto rounds_grid = int_grid_or(spec, "rounds", {1, 5, 10, 25, 50, 100, 200});
    std::sort(rounds_grid.begin(), rounds_grid.end());
    rounds_grid.erase(std::unique(rounds_grid.begin(), rounds_grid.end()), rounds_grid.end());

    std::vector<Records> per_rep(spec.replications);
    parallel_for(spec.replications, spec.threads, [&](int rep) {
        RecordSink sink{spec.name, rep, &per_rep[rep]};
        const uint64_t rs = mix_seed(spec.base_seed, rep);
        for (size_t si = 0; si < sigma_grid.size(); ++si) {
            const double sigma = sigma_grid[si];
            Dataset train = marsadd_sample(spec.n_train, kInputDim, {sigma}, mix_seed(rs, 11));
            Dataset test = marsadd_sample(spec.n_test, kInputDim, {sigma}, mix_seed(rs, 12));
            for (size_t ei = 0; ei < eta_grid.size(); ++ei) {
                for (size_t li = 0; li < leaves_grid.size(); ++li) {
                    BoostConfig cfg;
                    cfg.rounds = rounds_grid.back();
                    cfg.learning_rate = eta_grid[ei];
                    cfg.tree.feature_fraction = 1.0;
                    cfg.tree.max_leaves = leaves_grid[li];
                    cfg.seed = mix_seed(rs, 3000 + 100 * si + 10 * ei + li);
                    BoostModel model = fit_boost(train, cfg);
                    auto train_stats = boost_prefix_stats(model, train.inputs, rounds_grid);
                    auto test_stats = boost_prefix_stats(model, test.inputs, rounds_grid);
                    for (size_t ri = 0; ri < rounds_grid.size(); ++ri) {
                        const long gi = static_cast<long>(
                            ((si * eta_grid.size() + ei) * leaves_grid.size() + li) *
                                rounds_grid.size() +
                            ri);
                        HyperPoint pt;
                        pt.sigma = sigma;
                        pt.eta = eta_grid[ei];
                        pt.max_leaves = leaves_grid[li];
                        pt.rounds = rounds_grid[ri];
                        const double p_train =
                            p0_from_norms(train_stats.squared_norms[ri], spec.n_train);
                        const double p_test =
                            p0_from_norms(test_stats.squared_norms[ri], spec.n_train);
                        sink.add(gi, pt, "p_train", p_train);
                        sink.add(gi, pt, "p_test", p_test);
                        sink.add(gi, pt, "ep_gap", p_train - p_test);
                        sink.add(gi, pt, "mse_test",
                                 mse(test_stats.predictions[ri], test.outcomes));
                    }
                }
            }
        }
    });
    return finalize(std::move(per_rep));
}

// ---------------------------------------------------------------------------
// dof-grid: covariance degrees of freedom against in-/out-of-sample error and
// effective parameters, across three construction scenarios.
// ---------------------------------------------------------------------------
Records run_dof_grid(const ExperimentSpec& spec) {
    auto sigma_grid = grid_or(spec, "sigma", {1.0});
    auto m_grid = grid_or(spec, "m", {1.0 / kInputDim, 1.0 / 3.0, 2.0 / 3.0, 1.0});
    auto b_grid = int_grid_or(spec, "B", {1, 5, 20, 50});
    const int dof_reps = option_int(spec, "dof_reps", 50);
    const int insample_reps = option_int(spec, "insample_reps", 10);
    for (double sigma : sigma_grid)
        if (sigma <= 0.0)
            throw std::invalid_argument(
                "run_experiment: dof-grid requires sigma > 0 (df is undefined at sigma = 0)");

    struct Scenario {
        std::optional<int> max_leaves;
        bool bootstrap;
    };
    const std::vector<Scenario> scenarios = {{100, true}, {std::nullopt, true},
                                             {std::nullopt, false}};

    std::vector<Records> per_rep(spec.replications);
    parallel_for(spec.replications, spec.threads, [&](int rep) {
        RecordSink sink{spec.name, rep, &per_rep[rep]};
        const uint64_t rs = mix_seed(spec.base_seed, rep);
        for (size_t si = 0; si < sigma_grid.size(); ++si) {
            const double sigma = sigma_grid[si];
            Dataset train = marsadd_sample(spec.n_train, kInputDim, {sigma}, mix_seed(rs, 11));
            Dataset test = marsadd_sample(spec.n_test, kInputDim, {sigma}, mix_seed(rs, 12));
            for (size_t sc = 0; sc < scenarios.size(); ++sc) {
                for (size_t mi = 0; mi < m_grid.size(); ++mi) {
                    for (size_t bi = 0; bi < b_grid.size(); ++bi) {
                        const long gi = static_cast<long>(
                            ((si * scenarios.size() + sc) * m_grid.size() + mi) * b_grid.size() +
                            bi);
                        const uint64_t cell =
                            mix_seed(rs, 4000 + 1000 * si + 100 * sc + 10 * mi + bi);
                        HyperPoint pt;
                        pt.sigma = sigma;
                        pt.feature_fraction = m_grid[mi];
                        pt.tree_count = b_grid[bi];
                        pt.max_leaves = scenarios[sc].max_leaves;
                        pt.bootstrap = scenarios[sc].bootstrap ? 1 : 0;

                        auto factory = forest_factory(b_grid[bi], m_grid[mi],
                                                      scenarios[sc].max_leaves,
                                                      scenarios[sc].bootstrap);
                        DofEstimate dof = estimate_dof(factory, train, marsadd, {sigma}, dof_reps,
                                                       mix_seed(cell, 1));
                        sink.add(gi, pt, "dof", dof.value);

                        ForestModel forest = fit_forest(
                            train,
                            forest_config(b_grid[bi], m_grid[mi], scenarios[sc].max_leaves,
                                          scenarios[sc].bootstrap, mix_seed(cell, 2)));
                        std::vector<double> train_preds(spec.n_train), test_preds(spec.n_test);
                        double train_norm = 0.0, test_norm = 0.0;
                        for (int i = 0; i < spec.n_train; ++i) {
                            SmootherWeights w = forest.weights(train.inputs.row(i));
                            train_preds[i] = w.dot(forest.outcomes);
                            train_norm += w.squared_norm();
                        }
                        for (int j = 0; j < spec.n_test; ++j) {
                            SmootherWeights w = forest.weights(test.inputs.row(j));
                            test_preds[j] = w.dot(forest.outcomes);
                            test_norm += w.squared_norm();
                        }
                        sink.add(gi, pt, "mse_insample",
                                 insample_error(train_preds, train, marsadd, sigma, insample_reps,
                                                mix_seed(cell, 3)));
                        sink.add(gi, pt, "mse_test", mse(test_preds, test.outcomes));
                        sink.add(gi, pt, "p_train",
                                 static_cast<double>(spec.n_train) / spec.n_train * train_norm);
                        sink.add(gi, pt, "p_test",
                                 static_cast<double>(spec.n_train) / spec.n_test * test_norm);
                    }
                }
            }
        }
    });
    return finalize(std::move(per_rep));
}

// ---------------------------------------------------------------------------
// bootstrap-effect / m-gap: smoothing effects of bagging and split randomness
// in full-depth ensembles.
// ---------------------------------------------------------------------------
Records run_bagging_grid(const ExperimentSpec& spec, std::vector<double> default_m,
                         std::vector<int> default_bootstrap) {
    auto sigma_grid = grid_or(spec, "sigma", {1.0});
    auto m_grid = grid_or(spec, "m", default_m);
    auto bootstrap_grid = int_grid_or(spec, "bootstrap", default_bootstrap);
    auto b_grid = int_grid_or(spec, "B", {1, 2, 5, 10, 20, 50});
    std::sort(b_grid.begin(), b_grid.end());
    const int b_max = b_grid.back();

    std::vector<Records> per_rep(spec.replications);
    parallel_for(spec.replications, spec.threads, [&](int rep) {
        RecordSink sink{spec.name, rep, &per_rep[rep]};
        const uint64_t rs = mix_seed(spec.base_seed, rep);
        for (size_t si = 0; si < sigma_grid.size(); ++si) {
            const double sigma = sigma_grid[si];
            Dataset train = marsadd_sample(spec.n_train, kInputDim, {sigma}, mix_seed(rs, 11));
            Dataset test = marsadd_sample(spec.n_test, kInputDim, {sigma}, mix_seed(rs, 12));
            for (size_t oi = 0; oi < bootstrap_grid.size(); ++oi) {
                for (size_t mi = 0; mi < m_grid.size(); ++mi) {
                    ForestModel forest = fit_forest(
                        train,
                        forest_config(b_max, m_grid[mi], std::nullopt, bootstrap_grid[oi] != 0,
                                      mix_seed(rs, 5000 + 100 * si + 10 * oi + mi)));
                    auto train_stats =
                        forest_prefix_stats(forest.trees, forest.outcomes, train.inputs, b_grid);
                    auto test_stats =
                        forest_prefix_stats(forest.trees, forest.outcomes, test.inputs, b_grid);
                    for (size_t bi = 0; bi < b_grid.size(); ++bi) {
                        const long gi = static_cast<long>(
                            ((si * bootstrap_grid.size() + oi) * m_grid.size() + mi) *
                                b_grid.size() +
                            bi);
                        HyperPoint pt;
                        pt.sigma = sigma;
                        pt.bootstrap = bootstrap_grid[oi];
                        pt.feature_fraction = m_grid[mi];
                        pt.tree_count = b_grid[bi];
                        const double p_train =
                            p0_from_norms(train_stats.squared_norms[bi], spec.n_train);
                        const double p_test =
                            p0_from_norms(test_stats.squared_norms[bi], spec.n_train);
                        sink.add(gi, pt, "p_train", p_train);
                        sink.add(gi, pt, "p_test", p_test);
                        sink.add(gi, pt, "ep_gap", p_train - p_test);
                        sink.add(gi, pt, "mse_test",
                                 mse(test_stats.predictions[bi], test.outcomes));
                    }
                }
            }
        }
    });
    return finalize(std::move(per_rep));
}

// ---------------------------------------------------------------------------
// snr-sweep: in-sample vs generalization error of full-depth ensembles with
// and without bagging across noise levels.
// ---------------------------------------------------------------------------
Records run_snr_sweep(const ExperimentSpec& spec) {
    auto sigma_grid = grid_or(spec, "sigma", {0.0, 1.0, 2.0});
    auto m_grid = grid_or(spec, "m", {1.0 / 3.0});
    auto bootstrap_grid = int_grid_or(spec, "bootstrap", {0, 1});
    auto b_grid = int_grid_or(spec, "B", {1, 2, 5, 10, 20, 50});
    std::sort(b_grid.begin(), b_grid.end());
    const int b_max = b_grid.back();
    const int insample_reps = option_int(spec, "insample_reps", 10);

    std::vector<Records> per_rep(spec.replications);
    parallel_for(spec.replications, spec.threads, [&](int rep) {
        RecordSink sink{spec.name, rep, &per_rep[rep]};
        const uint64_t rs = mix_seed(spec.base_seed, rep);
        for (size_t si = 0; si < sigma_grid.size(); ++si) {
            const double sigma = sigma_grid[si];
            Dataset train = marsadd_sample(spec.n_train, kInputDim, {sigma}, mix_seed(rs, 11));
            Dataset test = marsadd_sample(spec.n_test, kInputDim, {sigma}, mix_seed(rs, 12));
            for (size_t oi = 0; oi < bootstrap_grid.size(); ++oi) {
                for (size_t mi = 0; mi < m_grid.size(); ++mi) {
                    ForestModel forest = fit_forest(
                        train,
                        forest_config(b_max, m_grid[mi], std::nullopt, bootstrap_grid[oi] != 0,
                                      mix_seed(rs, 6000 + 100 * si + 10 * oi + mi)));
                    auto train_stats =
                        forest_prefix_stats(forest.trees, forest.outcomes, train.inputs, b_grid);
                    auto test_stats =
                        forest_prefix_stats(forest.trees, forest.outcomes, test.inputs, b_grid);
                    for (size_t bi = 0; bi < b_grid.size(); ++bi) {
                        const long gi = static_cast<long>(
                            ((si * bootstrap_grid.size() + oi) * m_grid.size() + mi) *
                                b_grid.size() +
                            bi);
                        HyperPoint pt;
                        pt.sigma = sigma;
                        pt.bootstrap = bootstrap_grid[oi];
                        pt.feature_fraction = m_grid[mi];
                        pt.tree_count = b_grid[bi];
                        sink.add(gi, pt, "mse_insample",
                                 insample_error(train_stats.predictions[bi], train, marsadd,
                                                sigma, insample_reps, mix_seed(rs, 7000 + gi)));
                        sink.add(gi, pt, "mse_test",
                                 mse(test_stats.predictions[bi], test.outcomes));
                        sink.add(gi, pt, "mse_train",
                                 mse(train_stats.predictions[bi], train.outcomes));
                    }
                }
            }
        }
    });
    return finalize(std::move(per_rep));
}

// ---------------------------------------------------------------------------
// dissimilarity: test sets offset from the training inputs by +-delta;
// smoothing and error as the offset grows.
// ---------------------------------------------------------------------------
Records run_dissimilarity(const ExperimentSpec& spec) {
    auto sigma_grid = grid_or(spec, "sigma", {0.0, 1.0, 2.0});
    auto m_grid = grid_or(spec, "m", {1.0 / kInputDim, 1.0 / 3.0, 2.0 / 3.0, 1.0});
    auto b_grid = int_grid_or(spec, "B", {1, 50});
    auto delta_grid = grid_or(spec, "delta", {0.0, 0.05, 0.1, 0.2, 0.3, 0.5});
    std::sort(b_grid.begin(), b_grid.end());
    const int b_max = b_grid.back();

    std::vector<Records> per_rep(spec.replications);
    parallel_for(spec.replications, spec.threads, [&](int rep) {
        RecordSink sink{spec.name, rep, &per_rep[rep]};
        const uint64_t rs = mix_seed(spec.base_seed, rep);
        for (size_t si = 0; si < sigma_grid.size(); ++si) {
            const double sigma = sigma_grid[si];
            Dataset train = marsadd_sample(spec.n_train, kInputDim, {sigma}, mix_seed(rs, 11));
            for (size_t mi = 0; mi < m_grid.size(); ++mi) {
                ForestModel forest = fit_forest(
                    train, forest_config(b_max, m_grid[mi], std::nullopt, false,
                                         mix_seed(rs, 8000 + 100 * si + mi)));
                for (size_t di = 0; di < delta_grid.size(); ++di) {
                    Dataset test = offset_test_set(train, {delta_grid[di]}, marsadd, {sigma},
                                                   mix_seed(rs, 13));
                    auto test_stats =
                        forest_prefix_stats(forest.trees, forest.outcomes, test.inputs, b_grid);
                    for (size_t bi = 0; bi < b_grid.size(); ++bi) {
                        const long gi = static_cast<long>(
                            ((si * m_grid.size() + mi) * delta_grid.size() + di) * b_grid.size() +
                            bi);
                        HyperPoint pt;
                        pt.sigma = sigma;
                        pt.feature_fraction = m_grid[mi];
                        pt.delta = delta_grid[di];
                        pt.tree_count = b_grid[bi];
                        pt.bootstrap = 0;
                        const double p_test =
                            p0_from_norms(test_stats.squared_norms[bi], spec.n_train);
                        sink.add(gi, pt, "p_test", p_test);
                        sink.add(gi, pt, "k_eff", spec.n_train / p_test);
                        sink.add(gi, pt, "mse_test",
                                 mse(test_stats.predictions[bi], test.outcomes));
                    }
                }
            }
        }
    });
    return finalize(std::move(per_rep));
}

// ---------------------------------------------------------------------------
// rep-mod-decomp: oracle-selected best draw of 50 re-initializations; best
// case error vs spread around it, by ensemble size.
// ---------------------------------------------------------------------------
Records run_rep_mod_decomp(const ExperimentSpec& spec) {
    auto sigma_grid = grid_or(spec, "sigma", {0.0});
    auto delta_grid = grid_or(spec, "delta", {0.1});
    auto m_grid = grid_or(spec, "m", {1.0 / kInputDim, 1.0 / 3.0, 2.0 / 3.0, 1.0});
    auto b_grid = int_grid_or(spec, "B", {1, 5, 20, 50});
    const int draws = option_int(spec, "draws", 50);

    std::vector<Records> per_rep(spec.replications);
    parallel_for(spec.replications, spec.threads, [&](int rep) {
        RecordSink sink{spec.name, rep, &per_rep[rep]};
        const uint64_t rs = mix_seed(spec.base_seed, rep);
        for (size_t si = 0; si < sigma_grid.size(); ++si) {
            const double sigma = sigma_grid[si];
            Dataset train = marsadd_sample(spec.n_train, kInputDim, {sigma}, mix_seed(rs, 11));
            for (size_t di = 0; di < delta_grid.size(); ++di) {
                Dataset test = offset_test_set(train, {delta_grid[di]}, marsadd, {sigma},
                                               mix_seed(rs, 13));
                for (size_t mi = 0; mi < m_grid.size(); ++mi) {
                    for (size_t bi = 0; bi < b_grid.size(); ++bi) {
                        const long gi = static_cast<long>(
                            ((si * delta_grid.size() + di) * m_grid.size() + mi) * b_grid.size() +
                            bi);
                        auto factory =
                            forest_factory(b_grid[bi], m_grid[mi], std::nullopt, false);
                        RepModDecomposition rm = rep_mod_decompose(
                            factory, train, test, draws,
                            mix_seed(rs, 9000 + 1000 * si + 100 * di + 10 * mi + bi));
                        HyperPoint pt;
                        pt.sigma = sigma;
                        pt.delta = delta_grid[di];
                        pt.feature_fraction = m_grid[mi];
                        pt.tree_count = b_grid[bi];
                        pt.bootstrap = 0;
                        sink.add(gi, pt, "mse_test", rm.mean_mse);
                        sink.add(gi, pt, "rep_bias", rm.rep_bias_proxy);
                        sink.add(gi, pt, "mod_var", rm.mod_var_proxy);
                    }
                }
            }
        }
    });
    return finalize(std::move(per_rep));
}

// ---------------------------------------------------------------------------
// variance-decomposition: sampling variance vs within-data model variance of
// forest predictions at fixed query points.
// ---------------------------------------------------------------------------
Records run_variance_decomposition(const ExperimentSpec& spec) {
    auto sigma_grid = grid_or(spec, "sigma", {1.0});
    auto m_grid = grid_or(spec, "m", {1.0 / kInputDim, 1.0 / 3.0, 2.0 / 3.0, 1.0});
    auto b_grid = int_grid_or(spec, "B", {1, 10, 50});
    const int outer = option_int(spec, "outer", 8);
    const int inner = option_int(spec, "inner", 8);
    const int queries = option_int(spec, "queries", 100);

    std::vector<Records> per_rep(spec.replications);
    parallel_for(spec.replications, spec.threads, [&](int rep) {
        RecordSink sink{spec.name, rep, &per_rep[rep]};
        const uint64_t rs = mix_seed(spec.base_seed, rep);
        for (size_t si = 0; si < sigma_grid.size(); ++si) {
            const double sigma = sigma_grid[si];
            Matrix query =
                marsadd_sample(queries, kInputDim, {0.0}, mix_seed(rs, 12)).inputs;
            auto data_factory = [&, sigma](uint64_t s) {
                return marsadd_sample(spec.n_train, kInputDim, {sigma}, s);
            };
            for (size_t mi = 0; mi < m_grid.size(); ++mi) {
                for (size_t bi = 0; bi < b_grid.size(); ++bi) {
                    const long gi =
                        static_cast<long>((si * m_grid.size() + mi) * b_grid.size() + bi);
                    auto factory = forest_factory(b_grid[bi], m_grid[mi], std::nullopt, false);
                    VarianceDecomposition vd = variance_decompose(
                        factory, data_factory, query, outer, inner,
                        mix_seed(rs, 10000 + 100 * si + 10 * mi + bi));
                    HyperPoint pt;
                    pt.sigma = sigma;
                    pt.feature_fraction = m_grid[mi];
                    pt.tree_count = b_grid[bi];
                    pt.bootstrap = 0;
                    sink.add(gi, pt, "samp_var", vd.samp_var);
                    sink.add(gi, pt, "within_z_var", vd.within_z_var);
                }
            }
        }
    });
    return finalize(std::move(per_rep));
}

// ---------------------------------------------------------------------------
// predictive-variance-*: realized prediction variance under label resampling
// vs the fixed-smoother formula ||s||^2 sigma^2. Rows with delta = 0 are
// evaluated at the training inputs; rows with delta blank at fresh inputs.
// ---------------------------------------------------------------------------
Records run_predictive_variance(const ExperimentSpec& spec, SmootherVariant variant) {
    auto sigma_grid = grid_or(spec, "sigma", {1.0});
    auto m_grid = grid_or(spec, "m", {1.0 / 3.0});
    auto leaves_grid = int_grid_or(spec, "max_leaves", {10, 100, 500});
    auto b_grid = int_grid_or(spec, "B", {1, 10, 50});
    const int resamples = option_int(spec, "resamples", 20);

    std::vector<Records> per_rep(spec.replications);
    parallel_for(spec.replications, spec.threads, [&](int rep) {
        RecordSink sink{spec.name, rep, &per_rep[rep]};
        const uint64_t rs = mix_seed(spec.base_seed, rep);
        for (size_t si = 0; si < sigma_grid.size(); ++si) {
            const double sigma = sigma_grid[si];
            Dataset train = marsadd_sample(spec.n_train, kInputDim, {sigma}, mix_seed(rs, 11));
            Matrix test_inputs =
                marsadd_sample(spec.n_test, kInputDim, {0.0}, mix_seed(rs, 12)).inputs;
            for (size_t mi = 0; mi < m_grid.size(); ++mi) {
                auto records = predictive_variance_experiment(
                    variant, leaves_grid, b_grid, train, marsadd, {sigma}, test_inputs,
                    m_grid[mi], resamples, mix_seed(rs, 11000 + 100 * si + mi));
                for (const auto& rec : records) {
                    size_t li = 0, bi = 0;
                    for (size_t k = 0; k < leaves_grid.size(); ++k)
                        if (leaves_grid[k] == rec.max_leaves) li = k;
                    for (size_t k = 0; k < b_grid.size(); ++k)
                        if (b_grid[k] == rec.tree_count) bi = k;
                    const long gi = static_cast<long>(
                        ((si * m_grid.size() + mi) * leaves_grid.size() + li) * b_grid.size() +
                        bi);
                    HyperPoint pt;
                    pt.sigma = sigma;
                    pt.feature_fraction = m_grid[mi];
                    pt.max_leaves = rec.max_leaves;
                    pt.tree_count = rec.tree_count;
                    if (rec.in_sample) pt.delta = 0.0;
                    sink.add(gi, pt, "pred_var", rec.predictive_variance);
                    sink.add(gi, pt, "weight_norm_var", rec.weight_norm_variance);
                }
            }
        }
    });
    return finalize(std::move(per_rep));
}

// ---------------------------------------------------------------------------
// csv-benchmark: the interpolating-ensemble analysis on an external CSV
// dataset with seeded subsampling into train/test halves.
// ---------------------------------------------------------------------------
Records run_csv_benchmark(const ExperimentSpec& spec) {
    const std::string path = option_str(spec, "data", "");
    if (path.empty())
        throw std::invalid_argument(
            "run_experiment: csv-benchmark requires --set data=<path> and --set target=<column>");
    const std::string target = option_str(spec, "target", "");
    if (target.empty())
        throw std::invalid_argument("run_experiment: csv-benchmark requires --set target=<column>");
    const std::string task_name = option_str(spec, "task", "regression");
    if (task_name != "regression" && task_name != "classification")
        throw std::invalid_argument("run_experiment: task must be regression or classification");
    const Task task =
        task_name == "classification" ? Task::kAveragingClassification : Task::kRegression;

    Dataset full = load_csv_dataset(path, target, task, std::nullopt, 0);
    const int per_side_default = std::min(2000, full.sample_count() / 2);
    const int per_side = option_int(spec, "subsample", per_side_default);
    if (2 * per_side > full.sample_count())
        throw std::invalid_argument("run_experiment: subsample too large for dataset");

    auto m_grid = grid_or(spec, "m", {1.0 / full.feature_count(), 1.0 / 3.0, 2.0 / 3.0, 1.0});
    auto b_grid = int_grid_or(spec, "B", {1, 2, 5, 10, 20, 50});
    std::sort(b_grid.begin(), b_grid.end());
    const int b_max = b_grid.back();

    std::vector<Records> per_rep(spec.replications);
    parallel_for(spec.replications, spec.threads, [&](int rep) {
        RecordSink sink{spec.name, rep, &per_rep[rep]};
        const uint64_t rs = mix_seed(spec.base_seed, rep);
        std::vector<int> order(full.sample_count());
        for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
        auto rng = make_rng(mix_seed(rs, 21));
        std::shuffle(order.begin(), order.end(), rng);

        auto take = [&](int offset, int count) {
            Dataset out;
            out.task = full.task;
            out.inputs = Matrix(count, full.feature_count());
            out.outcomes.resize(count);
            for (int i = 0; i < count; ++i) {
                const int src = order[offset + i];
                for (int j = 0; j < full.feature_count(); ++j)
                    out.inputs(i, j) = full.inputs(src, j);
                out.outcomes[i] = full.outcomes[src];
            }
            return out;
        };
        Dataset train = take(0, per_side);
        Dataset test = take(per_side, per_side);

        for (size_t mi = 0; mi < m_grid.size(); ++mi) {
            ForestModel forest =
                fit_forest(train, forest_config(b_max, m_grid[mi], std::nullopt, false,
                                                mix_seed(rs, 12000 + mi)));
            auto train_stats =
                forest_prefix_stats(forest.trees, forest.outcomes, train.inputs, b_grid);
            auto test_stats =
                forest_prefix_stats(forest.trees, forest.outcomes, test.inputs, b_grid);
            for (size_t bi = 0; bi < b_grid.size(); ++bi) {
                const long gi = static_cast<long>(mi * b_grid.size() + bi);
                HyperPoint pt;
                pt.feature_fraction = m_grid[mi];
                pt.tree_count = b_grid[bi];
                pt.bootstrap = 0;
                const double p_train = p0_from_norms(train_stats.squared_norms[bi], per_side);
                const double p_test = p0_from_norms(test_stats.squared_norms[bi], per_side);
                sink.add(gi, pt, "p_train", p_train);
                sink.add(gi, pt, "p_test", p_test);
                sink.add(gi, pt, "k_eff", per_side / p_test);
                sink.add(gi, pt, "mse_test", mse(test_stats.predictions[bi], test.outcomes));
                if (task == Task::kAveragingClassification)
                    sink.add(gi, pt, "misclass_test",
                             misclassification(test_stats.predictions[bi], test.outcomes));
            }
        }
    });
    return finalize(std::move(per_rep));
}

struct ExperimentDef {
    std::string id;
    std::string description;
    std::function<Records(const ExperimentSpec&)> run;
};

const std::vector<ExperimentDef>& registry() {
    static const std::vector<ExperimentDef> defs = {
        {"interp-by-m",
         "Full-depth forests without bootstrap: effective parameters, effective neighbors and "
         "error by ensemble size B and feature fraction m (default m grid {1/d, 1/3, 2/3, 1} is "
         "a choice, override with --set m=...).",
         run_interp_by_m},
        {"depth-sweep",
         "Leaf-limited forests (m=1/3, no bootstrap): training error, train/test effective "
         "parameters and their gap by B and max_leaves.",
         run_depth_sweep},
        {"boost-by-rounds",
         "Gradient boosting (eta=0.05): train/test effective parameters and their divergence by "
         "rounds and max_leaves.",
         run_boost_by_rounds},
        {"dof-grid",
         "Covariance degrees of freedom vs in-/out-of-sample error and effective parameters, "
         "for scenarios (max_leaves=100,+bootstrap), (full,+bootstrap) and (full,no bootstrap).",
         run_dof_grid},
        {"bootstrap-effect",
         "Effect of bagging on train/test effective parameters for full-depth ensembles "
         "(m=1/3).",
         [](const ExperimentSpec& s) { return run_bagging_grid(s, {1.0 / 3.0}, {0, 1}); }},
        {"m-gap",
         "Train-test effective parameter gap of bagged full-depth ensembles across feature "
         "fractions m.",
         [](const ExperimentSpec& s) {
             return run_bagging_grid(s, {1.0 / kInputDim, 1.0 / 3.0, 2.0 / 3.0, 1.0}, {1});
         }},
        {"snr-sweep",
         "In-sample and generalization error of full-depth ensembles with and without "
         "bootstrapping across noise levels sigma.",
         run_snr_sweep},
        {"dissimilarity",
         "Test sets offset by Uniform(-delta,+delta): test-time smoothing and error as the "
         "train-test dissimilarity grows.",
         run_dissimilarity},
        {"rep-mod-decomp",
         "Oracle-selected best of 50 model draws on a fixed train/test split: mean error, "
         "best-case error (rep_bias) and spread around the best draw (mod_var).",
         run_rep_mod_decomp},
        {"variance-decomposition",
         "Sampling variance vs within-data model variance of forest predictions at fixed query "
         "points.",
         run_variance_decomposition},
        {"predictive-variance-adaptive",
         "Realized prediction variance under label resampling vs ||s||^2 sigma^2 for standard "
         "forests (delta=0 rows are at training inputs; blank delta rows at fresh inputs).",
         [](const ExperimentSpec& s) {
             return run_predictive_variance(s, SmootherVariant::kAdaptive);
         }},
        {"predictive-variance-randomized",
         "Same comparison for totally randomized structures (built from permuted labels each "
         "resample).",
         [](const ExperimentSpec& s) {
             return run_predictive_variance(s, SmootherVariant::kTotallyRandomized);
         }},
        {"predictive-variance-frozen",
         "Same comparison with structures frozen across label resamples (a fixed linear "
         "smoother).",
         [](const ExperimentSpec& s) {
             return run_predictive_variance(s, SmootherVariant::kFrozen);
         }},
        {"csv-benchmark",
         "Interpolating-ensemble analysis on an external CSV dataset (--set data=, target=, "
         "task=regression|classification, subsample=).",
         run_csv_benchmark},
    };
    return defs;
}

}  // namespace

std::vector<ExperimentInfo> experiment_catalog() {
    std::vector<ExperimentInfo> out;
    for (const auto& def : registry()) out.push_back({def.id, def.description});
    return out;
}

std::vector<ExperimentRecord> run_experiment(const ExperimentSpec& spec) {
    if (spec.replications < 1)
        throw std::invalid_argument("run_experiment: replications must be >= 1");
    for (const auto& def : registry())
        if (def.id == spec.name) return def.run(spec);
    std::string known;
    for (const auto& def : registry()) {
        if (!known.empty()) known += ", ";
        known += def.id;
    }
    throw std::invalid_argument("run_experiment: unknown experiment '" + spec.name +
                                "'; valid ids: " + known);
}

}  // namespace treesmooth
