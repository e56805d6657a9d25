#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>

#include "treesmooth/core.hpp"

namespace treesmooth {

/// Standard deviation of additive Gaussian outcome noise.
struct NoiseSpec {
    double sigma = 1.0;
};

/// Half-width of the per-coordinate uniform offset applied to test inputs.
struct OffsetSpec {
    double delta = 0.0;
};

using MeanFn = std::function<double(std::span<const double>)>;

/// Additive benchmark regression surface on [0,1]^d, d >= 5:
///   0.1*exp(4*x1) + 4/(1+exp(-20*(x2-0.5))) + 3*x3 + 2*x4 + x5
/// (1-based coordinates; extra coordinates are ignored).
double marsadd_mean(std::span<const double> x);

/// n i.i.d. Uniform(0,1)^d inputs with outcomes marsadd_mean(x) + N(0, sigma^2).
Dataset marsadd_sample(int n, int d, NoiseSpec noise, uint64_t seed);

/// Same inputs, fresh outcomes mean_fn(x_i) + N(0, sigma^2).
Dataset resample_labels(const Dataset& data, const MeanFn& mean_fn, NoiseSpec noise,
                        uint64_t seed);

/// Test set whose inputs are the train inputs plus entrywise Uniform(-delta, +delta)
/// offsets (no clipping); outcomes are mean_fn + noise at the offset inputs.
/// The offsets scale linearly in delta for a fixed seed, so test sets at
/// different delta values are nested perturbations of the same draw.
Dataset offset_test_set(const Dataset& train, OffsetSpec spec, const MeanFn& mean_fn,
                        NoiseSpec noise, uint64_t seed);

/// Parses a numeric CSV (header row, comma separated, '.' decimal point) into a
/// Dataset, taking `target_column` as the outcome and all other columns as
/// features. If subsample is given, keeps a seeded uniform subset without
/// replacement of that size.
Dataset load_csv_dataset(const std::string& path, const std::string& target_column, Task task,
                         std::optional<int> subsample, uint64_t seed);

/// Downloads url to destination_path; returns the path. If the destination
/// already exists and is nonempty, returns immediately without touching the
/// network. Failed downloads leave no partial file behind.
std::string fetch_dataset(const std::string& url, const std::string& destination_path);

}  // namespace treesmooth
