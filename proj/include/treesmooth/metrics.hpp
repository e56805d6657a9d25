#pragma once

#include <cstdint>
#include <functional>
#include <span>

#include "treesmooth/core.hpp"
#include "treesmooth/datagen.hpp"

namespace treesmooth {

/// Effective parameters of a smoother over a query set:
///   (n / #queries) * sum_j ||s(x_j)||^2.
/// Equals 1 for the training-sample mean, n for any unit-weight smoother,
/// and n/k for a k-nearest-neighbor weight matrix.
double effective_params(const WeightMatrix& weights);

/// Effective number of nearest neighbors n / effective_params. Only defined
/// for averaging smoothers; rows that are not normalized to 1 (within 1e-12)
/// or carry negative weight (boosted smoothers) are rejected.
double effective_k(const WeightMatrix& weights);

/// effective_params(train) - effective_params(test); positive values mean the
/// model smooths less at training inputs than at unseen ones.
double ep_gap(const WeightMatrix& train_weights, const WeightMatrix& test_weights);

/// Fits a model on a training set and returns its predictions at the query
/// inputs. The seed controls any randomness in the fit.
using FitPredict =
    std::function<std::vector<double>(const Dataset& train, const Matrix& query, uint64_t seed)>;

struct DofEstimate {
    double value = 0.0;
    int replications = 0;
    double sigma = 0.0;
};

/// Monte-Carlo covariance degrees of freedom: resample labels `replications`
/// times, refit, and return sum_i Cov(yhat_i, y_i) normalized by the pooled
/// empirical label variance (which estimates sigma^2 from the same draws, so
/// a predictor with yhat == y scores exactly n with no Monte-Carlo noise).
DofEstimate estimate_dof(const FitPredict& fit_predict, const Dataset& data,
                         const MeanFn& mean_fn, NoiseSpec noise, int replications,
                         uint64_t seed);

double mse(std::span<const double> predictions, std::span<const double> targets);

/// Mean of {predicted class != target} with class = 1 iff prediction >= 0.5.
double misclassification(std::span<const double> predictions, std::span<const double> targets);

}  // namespace treesmooth
