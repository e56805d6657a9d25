#include "treesmooth/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "treesmooth/rng.hpp"

namespace treesmooth {

double marsadd_mean(std::span<const double> x) {
    if (x.size() < 5)
        throw std::invalid_argument("marsadd_mean: input needs at least 5 coordinates");
    return 0.1 * std::exp(4.0 * x[0]) + 4.0 / (1.0 + std::exp(-20.0 * (x[1] - 0.5))) +
           3.0 * x[2] + 2.0 * x[3] + x[4];
}

Dataset marsadd_sample(int n, int d, NoiseSpec noise, uint64_t seed) {
    if (n < 1) throw std::invalid_argument("marsadd_sample: n must be >= 1");
    if (d < 5) throw std::invalid_argument("marsadd_sample: d must be >= 5");
    if (noise.sigma < 0.0) throw std::invalid_argument("marsadd_sample: sigma must be >= 0");
    Dataset data;
    data.inputs = Matrix(n, d);
    data.outcomes.resize(n);
    // Inputs and standard-normal noise draws come from separate streams; the
    // noise is scaled by sigma afterwards, so datasets at different sigma but
    // the same seed share inputs and noise shape.
    auto input_rng = make_rng(mix_seed(seed, 0));
    auto noise_rng = make_rng(mix_seed(seed, 1));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) data.inputs(i, j) = unif(input_rng);
    for (int i = 0; i < n; ++i)
        data.outcomes[i] = marsadd_mean(data.inputs.row(i)) + noise.sigma * gauss(noise_rng);
    return data;
}

Dataset resample_labels(const Dataset& data, const MeanFn& mean_fn, NoiseSpec noise,
                        uint64_t seed) {
    if (noise.sigma < 0.0) throw std::invalid_argument("resample_labels: sigma must be >= 0");
    Dataset out;
    out.inputs = data.inputs;
    out.task = data.task;
    out.outcomes.resize(data.sample_count());
    auto rng = make_rng(mix_seed(seed, 1));
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int i = 0; i < data.sample_count(); ++i)
        out.outcomes[i] = mean_fn(data.inputs.row(i)) + noise.sigma * gauss(rng);
    return out;
}

Dataset offset_test_set(const Dataset& train, OffsetSpec spec, const MeanFn& mean_fn,
                        NoiseSpec noise, uint64_t seed) {
    if (spec.delta < 0.0) throw std::invalid_argument("offset_test_set: delta must be >= 0");
    Dataset out;
    out.task = train.task;
    const int n = train.sample_count();
    const int d = train.feature_count();
    out.inputs = Matrix(n, d);
    out.outcomes.resize(n);
    auto offset_rng = make_rng(mix_seed(seed, 2));
    auto noise_rng = make_rng(mix_seed(seed, 3));
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) {
            double shift = spec.delta * unit(offset_rng);
            out.inputs(i, j) = spec.delta == 0.0 ? train.inputs(i, j) : train.inputs(i, j) + shift;
        }
    for (int i = 0; i < n; ++i)
        out.outcomes[i] = mean_fn(out.inputs.row(i)) + noise.sigma * gauss(noise_rng);
    return out;
}

}  // namespace treesmooth
