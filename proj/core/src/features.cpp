#include "motordiag/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "motordiag/rng.hpp"

namespace motordiag {

FeatureVector encode(const MotorReading& reading) {
    FeatureVector x{};
    x[feat::kTep] = reading.tep;
    for (std::size_t k = 0; k < 3; ++k) {
        x[feat::kCi + k] = reading.ci[k];
        const Resistance& r = reading.cr[k];
        x[feat::kCr + k] = r.open ? 0.0 : r.ohms;
        x[feat::kOpen + k] = r.open ? 1.0 : 0.0;
    }
    x[feat::kSound] = (reading.sound == Sound::abnormal) ? 1.0 : 0.0;
    return x;
}

Matrix encode(const Dataset& dataset) {
    Matrix m(dataset.size(), feat::kCount);
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const FeatureVector x = encode(dataset.readings[i]);
        std::copy(x.begin(), x.end(), m.row(i).begin());
    }
    return m;
}

std::vector<long long> largest_remainder_counts(std::span<const double> quotas,
                                                long long target) {
    const std::size_t k = quotas.size();
    std::vector<long long> counts(k);
    std::vector<std::pair<double, std::size_t>> remainders(k);
    long long assigned = 0;
    for (std::size_t i = 0; i < k; ++i) {
        counts[i] = static_cast<long long>(std::floor(quotas[i]));
        assigned += counts[i];
        remainders[i] = {quotas[i] - std::floor(quotas[i]), i};
    }
    // descending remainder, ascending index on ties
    std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    long long leftover = target - assigned;
    for (std::size_t i = 0; leftover > 0 && i < k; ++i, --leftover) {
        ++counts[remainders[i].second];
    }
    // leftover < 0 can only happen if quotas were inconsistent with target
    for (std::size_t i = k; leftover < 0 && i > 0; --i) {
        const std::size_t idx = remainders[i - 1].second;
        if (counts[idx] > 0) {
            --counts[idx];
            ++leftover;
        }
    }
    return counts;
}

SplitResult stratified_split(const Dataset& dataset, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw DataError("test_fraction must be in (0,1)");
    }
    if (!dataset.labeled()) throw DataError("stratified_split requires a labeled dataset");

    const auto labels = dataset.label_indices();
    std::array<std::vector<std::size_t>, 3> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        by_class[static_cast<std::size_t>(labels[i])].push_back(i);
    }
    std::vector<double> quotas;
    std::vector<std::size_t> present;
    for (std::size_t c = 0; c < 3; ++c) {
        if (by_class[c].empty()) continue;
        if (by_class[c].size() < 2) {
            throw DataError(std::string("class ") + label_token(label_from_index(int(c))) +
                            " has fewer than 2 members");
        }
        present.push_back(c);
        quotas.push_back(static_cast<double>(by_class[c].size()) * test_fraction);
    }
    const long long test_total =
        std::llround(static_cast<double>(dataset.size()) * test_fraction);
    const auto test_counts = largest_remainder_counts(quotas, test_total);

    std::vector<bool> in_test(dataset.size(), false);
    for (std::size_t p = 0; p < present.size(); ++p) {
        auto indices = by_class[present[p]];
        Rng rng(mix_seed(seed, present[p]));
        shuffle(indices, rng);
        for (long long t = 0; t < test_counts[p]; ++t) {
            in_test[indices[static_cast<std::size_t>(t)]] = true;
        }
    }

    SplitResult result;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        (in_test[i] ? result.test : result.train).readings.push_back(dataset.readings[i]);
    }
    return result;
}

ScalerParams fit_scaler(const Matrix& train) {
    if (train.rows() == 0) throw DataError("fit_scaler requires a nonempty matrix");
    ScalerParams params;
    const double n = static_cast<double>(train.rows());
    for (std::size_t j = 0; j < feat::kCount; ++j) {
        bool constant = true;
        const double first = train(0, j);
        double sum = 0.0;
        for (std::size_t i = 0; i < train.rows(); ++i) {
            const double v = train(i, j);
            sum += v;
            if (v != first) constant = false;
        }
        if (constant) {
            // exact mean so constant training channels scale to exactly 0
            params.mean[j] = first;
            params.std[j] = 1e-12;
            continue;
        }
        const double mean = sum / n;
        double ss = 0.0;
        for (std::size_t i = 0; i < train.rows(); ++i) {
            const double d = train(i, j) - mean;
            ss += d * d;
        }
        params.mean[j] = mean;
        params.std[j] = std::max(std::sqrt(ss / n), 1e-12); // population deviation
    }
    return params;
}

Matrix apply_scaler(const ScalerParams& params, const Matrix& m) {
    Matrix out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            out(i, j) = (m(i, j) - params.mean[j]) / params.std[j];
        }
    }
    return out;
}

FeatureVector apply_scaler(const ScalerParams& params, std::span<const double> x) {
    FeatureVector out{};
    for (std::size_t j = 0; j < feat::kCount; ++j) {
        out[j] = (x[j] - params.mean[j]) / params.std[j];
    }
    return out;
}

} // namespace motordiag
