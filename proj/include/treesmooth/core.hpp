#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace treesmooth {

enum class Task { kRegression, kAveragingClassification };

/// Dense row-major matrix of doubles; rows are observations.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> values;

    Matrix() = default;
    Matrix(int r, int c, double fill = 0.0)
        : rows(r), cols(c), values(static_cast<size_t>(r) * static_cast<size_t>(c), fill) {}

    double& operator()(int i, int j) { return values[static_cast<size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return values[static_cast<size_t>(i) * cols + j]; }

    std::span<const double> row(int i) const {
        return {values.data() + static_cast<size_t>(i) * cols, static_cast<size_t>(cols)};
    }
};

/// A supervised sample: n input rows, n outcomes.
/// For averaging classification every outcome must be 0 or 1; predictions
/// are class-1 probabilities obtained by averaging labels.
struct Dataset {
    Matrix inputs;
    std::vector<double> outcomes;
    Task task = Task::kRegression;

    int sample_count() const { return inputs.rows; }
    int feature_count() const { return inputs.cols; }

    void validate() const {
        if (outcomes.size() != static_cast<size_t>(inputs.rows))
            throw std::invalid_argument("Dataset: outcomes length does not match input rows");
        if (task == Task::kAveragingClassification) {
            for (double y : outcomes)
                if (y != 0.0 && y != 1.0)
                    throw std::invalid_argument(
                        "Dataset: averaging-classification outcomes must be 0 or 1");
        }
    }
};

/// Sparse weight vector over training indices for one query point.
/// A model's prediction at that point is dot(weights, y_train).
/// Entries are kept sorted by training index, and dot/sum/squared_norm
/// accumulate in entry order so that identities asserted elsewhere
/// (prediction == dot(weights, y)) hold bitwise.
struct SmootherWeights {
    std::vector<std::pair<int, double>> entries;  // (training index, weight), index-sorted
    int train_size = 0;

    double dot(std::span<const double> y) const {
        double acc = 0.0;
        for (const auto& [i, w] : entries) acc += w * y[i];
        return acc;
    }

    double sum() const {
        double acc = 0.0;
        for (const auto& [i, w] : entries) acc += w;
        return acc;
    }

    double squared_norm() const {
        double acc = 0.0;
        for (const auto& [i, w] : entries) acc += w * w;
        return acc;
    }
};

/// One SmootherWeights row per query point, all against the same train set.
struct WeightMatrix {
    std::vector<SmootherWeights> rows;
    int train_size = 0;

    int query_count() const { return static_cast<int>(rows.size()); }
};

}  // namespace treesmooth
