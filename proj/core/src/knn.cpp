#include "motordiag/knn.hpp"

#include <algorithm>
#include <cmath>

#include "motordiag/archive.hpp"

namespace motordiag {

KnnModel knn_fit(const Matrix& scaled_features, std::span<const int> labels, std::size_t k) {
    if (scaled_features.rows() < k) {
        throw DataError("k-NN requires at least k training samples");
    }
    if (scaled_features.rows() != labels.size()) throw DataError("feature/label count mismatch");
    return KnnModel{scaled_features, {labels.begin(), labels.end()}, k};
}

std::vector<double> knn_predict_proba(const KnnModel& model, std::span<const double> x) {
    const std::size_t n = model.train.rows();
    std::vector<std::pair<double, std::size_t>> dist(n); // (squared distance, index)
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = model.train.row(i);
        double d2 = 0.0;
        for (std::size_t j = 0; j < row.size(); ++j) {
            const double d = row[j] - x[j];
            d2 += d * d;
        }
        dist[i] = {d2, i};
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(model.k),
                      dist.end()); // pair ordering = distance, then lower index

    std::vector<double> votes(kNumClasses, 0.0);
    std::vector<double> dist_sum(kNumClasses, 0.0);
    for (std::size_t t = 0; t < model.k; ++t) {
        const auto c = static_cast<std::size_t>(model.labels[dist[t].second]);
        votes[c] += 1.0;
        dist_sum[c] += std::sqrt(dist[t].first);
    }

    std::vector<double> proba(kNumClasses);
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        proba[c] = votes[c] / static_cast<double>(model.k);
    }

    // Resolve vote ties by smallest mean neighbor distance so the reported
    // probabilities keep argmax == prediction.
    double top = *std::max_element(votes.begin(), votes.end());
    int winner = -1;
    double winner_mean = 0.0;
    int tied = 0;
    for (int c = 0; c < kNumClasses; ++c) {
        const auto cc = static_cast<std::size_t>(c);
        if (votes[cc] != top) continue;
        ++tied;
        const double mean = dist_sum[cc] / votes[cc];
        if (winner < 0 || mean < winner_mean) {
            winner = c;
            winner_mean = mean;
        }
    }
    if (tied > 1) {
        const auto nudged = nudge_winner({proba[0], proba[1], proba[2]}, winner);
        return {nudged.begin(), nudged.end()};
    }
    return proba;
}

void KnnClassifier::fit(const Matrix& features, std::span<const int> labels) {
    scaler_ = fit_scaler(features);
    model_ = knn_fit(apply_scaler(scaler_, features), labels, params_.k);
}

Probabilities KnnClassifier::predict_proba(std::span<const double> x) const {
    const FeatureVector xs = apply_scaler(scaler_, x);
    const auto p = knn_predict_proba(model_, xs);
    return {p[0], p[1], p[2]};
}

void KnnClassifier::save(BinaryWriter& out) const {
    out.u64(params_.k);
    out.f64_vec(scaler_.mean);
    out.f64_vec(scaler_.std);
    out.u64(model_.train.rows());
    out.u64(model_.train.cols());
    out.f64_vec(model_.train.data());
    std::vector<long long> labels(model_.labels.begin(), model_.labels.end());
    out.i64_vec(labels);
}

void KnnClassifier::load(BinaryReader& in) {
    params_.k = in.u64();
    auto mean = in.f64_vec();
    auto sd = in.f64_vec();
    std::copy(mean.begin(), mean.end(), scaler_.mean.begin());
    std::copy(sd.begin(), sd.end(), scaler_.std.begin());
    const std::size_t rows = in.u64();
    const std::size_t cols = in.u64();
    model_ = {};
    model_.k = params_.k;
    model_.train = Matrix(rows, cols);
    model_.train.data() = in.f64_vec();
    if (model_.train.data().size() != rows * cols) throw ArchiveError("knn matrix size mismatch");
    for (long long v : in.i64_vec()) model_.labels.push_back(static_cast<int>(v));
}

} // namespace motordiag
