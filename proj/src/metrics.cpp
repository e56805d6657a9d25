#include "treesmooth/metrics.hpp"

#include <cmath>
#include <vector>

#include "treesmooth/rng.hpp"

namespace treesmooth {

double effective_params(const WeightMatrix& weights) {
    if (weights.rows.empty())
        throw std::invalid_argument("effective_params: empty query set");
    if (weights.train_size < 1)
        throw std::invalid_argument("effective_params: train_size must be >= 1");
    double total = 0.0;
    for (const SmootherWeights& row : weights.rows) total += row.squared_norm();
    return static_cast<double>(weights.train_size) / weights.query_count() * total;
}

double effective_k(const WeightMatrix& weights) {
    constexpr double kSumTolerance = 1e-12;
    for (const SmootherWeights& row : weights.rows) {
        if (std::abs(row.sum() - 1.0) > kSumTolerance)
            throw std::invalid_argument(
                "effective_k: weights must sum to 1 (not an averaging smoother)");
        for (const auto& [i, w] : row.entries)
            if (w < 0.0)
                throw std::invalid_argument(
                    "effective_k: negative weights (not an averaging smoother)");
    }
    return static_cast<double>(weights.train_size) / effective_params(weights);
}

double ep_gap(const WeightMatrix& train_weights, const WeightMatrix& test_weights) {
    return effective_params(train_weights) - effective_params(test_weights);
}

namespace {

// Unbiased sample covariance between two columns of draw matrices (two-pass).
double sample_cov(std::span<const double> a, std::span<const double> b) {
    const int r = static_cast<int>(a.size());
    double mean_a = 0.0, mean_b = 0.0;
    for (int i = 0; i < r; ++i) {
        mean_a += a[i];
        mean_b += b[i];
    }
    mean_a /= r;
    mean_b /= r;
    double acc = 0.0;
    for (int i = 0; i < r; ++i) acc += (a[i] - mean_a) * (b[i] - mean_b);
    return acc / (r - 1);
}

}  // namespace

DofEstimate estimate_dof(const FitPredict& fit_predict, const Dataset& data,
                         const MeanFn& mean_fn, NoiseSpec noise, int replications,
                         uint64_t seed) {
    if (noise.sigma <= 0.0)
        throw std::invalid_argument("estimate_dof: sigma must be > 0");
    if (replications < 2)
        throw std::invalid_argument("estimate_dof: needs at least 2 replications");
    const int n = data.sample_count();
    const int r = replications;
    Matrix labels(r, n);
    Matrix preds(r, n);
    for (int rep = 0; rep < r; ++rep) {
        Dataset resampled =
            resample_labels(data, mean_fn, noise, mix_seed(seed, 2 * static_cast<uint64_t>(rep)));
        std::vector<double> p =
            fit_predict(resampled, data.inputs, mix_seed(seed, 2 * static_cast<uint64_t>(rep) + 1));
        if (p.size() != static_cast<size_t>(n))
            throw std::runtime_error("estimate_dof: fit_predict returned wrong length");
        for (int i = 0; i < n; ++i) {
            labels(rep, i) = resampled.outcomes[i];
            preds(rep, i) = p[i];
        }
    }
    std::vector<double> label_col(r), pred_col(r);
    double cov_total = 0.0, var_total = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int rep = 0; rep < r; ++rep) {
            label_col[rep] = labels(rep, i);
            pred_col[rep] = preds(rep, i);
        }
        cov_total += sample_cov(pred_col, label_col);
        var_total += sample_cov(label_col, label_col);
    }
    DofEstimate out;
    out.replications = r;
    out.sigma = noise.sigma;
    out.value = static_cast<double>(n) * (cov_total / var_total);
    return out;
}

double mse(std::span<const double> predictions, std::span<const double> targets) {
    if (predictions.size() != targets.size())
        throw std::invalid_argument("mse: length mismatch");
    if (predictions.empty()) throw std::invalid_argument("mse: empty input");
    double acc = 0.0;
    for (size_t i = 0; i < predictions.size(); ++i) {
        const double diff = predictions[i] - targets[i];
        acc += diff * diff;
    }
    return acc / predictions.size();
}

double misclassification(std::span<const double> predictions, std::span<const double> targets) {
    if (predictions.size() != targets.size())
        throw std::invalid_argument("misclassification: length mismatch");
    if (predictions.empty()) throw std::invalid_argument("misclassification: empty input");
    int wrong = 0;
    for (size_t i = 0; i < predictions.size(); ++i) {
        const double label = predictions[i] >= 0.5 ? 1.0 : 0.0;
        if (label != targets[i]) ++wrong;
    }
    return static_cast<double>(wrong) / predictions.size();
}

}  // namespace treesmooth
