#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "treesmooth/core.hpp"
#include "treesmooth/datagen.hpp"
#include "treesmooth/metrics.hpp"

namespace treesmooth {

struct VarianceDecomposition {
    double total_var = 0.0;     // pooled per-point variance over all draws
    double samp_var = 0.0;      // variance due to training-data sampling
    double within_z_var = 0.0;  // variance due to model randomness given data
    int outer_reps = 0;
    int inner_reps = 0;
};

/// Two-level Monte-Carlo decomposition of prediction variance at a fixed
/// query set: outer draws of the training data, inner refits with fresh model
/// randomness. within_z_var is the mean of inner variances; samp_var is the
/// variance of inner means debiased by within_z_var / inner_reps (the usual
/// between-group variance component, floored at 0). All three are averaged
/// over the query points.
VarianceDecomposition variance_decompose(const FitPredict& model,
                                         const std::function<Dataset(uint64_t)>& data_factory,
                                         const Matrix& query, int outer_reps, int inner_reps,
                                         uint64_t seed);

struct RepModDecomposition {
    double mean_mse = 0.0;       // average test MSE over draws
    double rep_bias_proxy = 0.0; // test MSE of the best draw (oracle selection)
    double mod_var_proxy = 0.0;  // mean squared prediction distance to the best draw
    int model_draws = 0;
    int best_draw = -1;
};

/// Refits the model `model_draws` times on a fixed train set (varying only
/// the construction seed), selects the draw with minimal test MSE using the
/// test outcomes, and summarizes best-case error and spread around it.
RepModDecomposition rep_mod_decompose(const FitPredict& model, const Dataset& train,
                                      const Dataset& test, int model_draws, uint64_t seed);

struct EmseBoundCheck {
    bool holds = false;
    bool sufficient = false;  // false when fewer than 2 family members
    double bound_mean = 0.0;  // mean over the family of 2*(rep_bias + mod_var)
    double bound_se = 0.0;
    double emse = 0.0;
    double margin = 0.0;  // bound + 3*combined SE - emse (negative on violation)
};

/// Checks emse_estimate <= 2 * mean(rep_bias + mod_var) + 3 combined Monte
/// Carlo standard errors across a family of decompositions over data draws.
EmseBoundCheck emse_bound_check(std::span<const RepModDecomposition> family,
                                double emse_estimate, double emse_se = 0.0);

enum class SmootherVariant {
    kAdaptive,           // structures refit on each outcome resample
    kTotallyRandomized,  // structures built from freshly permuted labels each resample
    kFrozen              // structures built once; only leaf values refit
};

struct PredictiveVarianceRecord {
    SmootherVariant variant;
    int max_leaves = 0;  // 0 encodes unlimited depth
    int tree_count = 0;
    bool in_sample = false;
    double predictive_variance = 0.0;   // mean over queries of Var over resamples
    double weight_norm_variance = 0.0;  // mean over queries and resamples of ||s||^2 sigma^2
};

/// For fixed inputs, resamples outcomes and refits forests per variant rule,
/// then compares the realized per-point prediction variance against the
/// fixed-smoother formula ||s(x)||^2 sigma^2, at the training inputs and at a
/// held-out query set.
std::vector<PredictiveVarianceRecord> predictive_variance_experiment(
    SmootherVariant variant, std::span<const int> leaf_grid, std::span<const int> ensemble_grid,
    const Dataset& data, const MeanFn& mean_fn, NoiseSpec noise, const Matrix& test_inputs,
    double feature_fraction, int resamples, uint64_t seed);

}  // namespace treesmooth
