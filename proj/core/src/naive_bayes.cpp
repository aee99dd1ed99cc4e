#include "motordiag/naive_bayes.hpp"

#include <algorithm>
#include <cmath>

#include "motordiag/archive.hpp"

namespace motordiag {

namespace {

/// log(sum(exp(scores))) ignoring -inf entries.
double log_sum_exp(std::span<const double> scores) {
    double hi = -std::numeric_limits<double>::infinity();
    for (double s : scores) hi = std::max(hi, s);
    double sum = 0.0;
    for (double s : scores) {
        if (std::isfinite(s)) sum += std::exp(s - hi);
    }
    return hi + std::log(sum);
}

} // namespace

std::size_t BinningRule::bin(std::size_t channel, double value) const {
    const auto& c = cuts[channel];
    return static_cast<std::size_t>(std::upper_bound(c.begin(), c.end(), value) - c.begin());
}

BinningRule fit_quantile_bins(const Matrix& features, std::size_t max_bins) {
    if (features.rows() == 0) throw DataError("cannot fit bins on an empty matrix");
    if (max_bins < 2) throw DataError("need at least 2 bins");
    BinningRule rule;
    rule.cuts.resize(features.cols());
    const std::size_t n = features.rows();
    std::vector<double> column(n);
    for (std::size_t j = 0; j < features.cols(); ++j) {
        for (std::size_t i = 0; i < n; ++i) column[i] = features(i, j);
        std::sort(column.begin(), column.end());
        auto& cuts = rule.cuts[j];
        for (std::size_t b = 1; b < max_bins; ++b) {
            const double cut = column[b * n / max_bins];
            if (cuts.empty() || cut > cuts.back()) cuts.push_back(cut);
        }
    }
    return rule;
}

NaiveBayesModel nb_fit(const Matrix& features, std::span<const int> labels,
                       std::size_t num_classes, std::size_t bins, double alpha) {
    if (features.rows() == 0) throw DataError("nb_fit requires a nonempty training set");
    if (features.rows() != labels.size()) throw DataError("feature/label count mismatch");
    if (alpha <= 0.0) throw DataError("alpha must be > 0");

    NaiveBayesModel model;
    model.num_classes = num_classes;
    model.binning = fit_quantile_bins(features, bins);

    const std::size_t channels = features.cols();
    std::vector<long long> class_count(num_classes, 0);
    for (int y : labels) ++class_count[static_cast<std::size_t>(y)];

    // counts[class][channel][bin]
    std::vector<std::vector<std::vector<long long>>> counts(num_classes);
    for (std::size_t c = 0; c < num_classes; ++c) {
        counts[c].resize(channels);
        for (std::size_t j = 0; j < channels; ++j) {
            counts[c][j].assign(model.binning.bins(j), 0);
        }
    }
    for (std::size_t i = 0; i < features.rows(); ++i) {
        const auto c = static_cast<std::size_t>(labels[i]);
        for (std::size_t j = 0; j < channels; ++j) {
            ++counts[c][j][model.binning.bin(j, features(i, j))];
        }
    }

    const auto n = static_cast<double>(features.rows());
    model.log_prior.resize(num_classes);
    model.log_likelihood.resize(num_classes);
    for (std::size_t c = 0; c < num_classes; ++c) {
        model.log_prior[c] = std::log(static_cast<double>(class_count[c]) / n);
        model.log_likelihood[c].resize(channels);
        for (std::size_t j = 0; j < channels; ++j) {
            const std::size_t nbins = model.binning.bins(j);
            const double denom = static_cast<double>(class_count[c]) +
                                 alpha * static_cast<double>(nbins);
            model.log_likelihood[c][j].resize(nbins);
            for (std::size_t b = 0; b < nbins; ++b) {
                model.log_likelihood[c][j][b] =
                    std::log((static_cast<double>(counts[c][j][b]) + alpha) / denom);
            }
        }
    }
    return model;
}

std::vector<double> nb_predict_proba(const NaiveBayesModel& model, std::span<const double> x) {
    std::vector<double> scores(model.num_classes);
    for (std::size_t c = 0; c < model.num_classes; ++c) {
        double s = model.log_prior[c];
        for (std::size_t j = 0; j < model.binning.num_channels(); ++j) {
            s += model.log_likelihood[c][j][model.binning.bin(j, x[j])];
        }
        scores[c] = s;
    }
    const double norm = log_sum_exp(scores);
    std::vector<double> proba(model.num_classes);
    for (std::size_t c = 0; c < model.num_classes; ++c) {
        proba[c] = std::isfinite(scores[c]) ? std::exp(scores[c] - norm) : 0.0;
    }
    return proba;
}

void NaiveBayesClassifier::fit(const Matrix& features, std::span<const int> labels) {
    model_ = nb_fit(features, labels, kNumClasses, params_.bins, params_.alpha);
}

Probabilities NaiveBayesClassifier::predict_proba(std::span<const double> x) const {
    const auto p = nb_predict_proba(model_, x);
    return {p[0], p[1], p[2]};
}

void NaiveBayesClassifier::save(BinaryWriter& out) const {
    out.u64(params_.bins);
    out.f64(params_.alpha);
    out.u64(model_.num_classes);
    out.u64(model_.binning.cuts.size());
    for (const auto& cuts : model_.binning.cuts) out.f64_vec(cuts);
    out.f64_vec(model_.log_prior);
    for (std::size_t c = 0; c < model_.num_classes; ++c) {
        for (const auto& channel : model_.log_likelihood[c]) out.f64_vec(channel);
    }
}

void NaiveBayesClassifier::load(BinaryReader& in) {
    params_.bins = in.u64();
    params_.alpha = in.f64();
    model_ = {};
    model_.num_classes = in.u64();
    model_.binning.cuts.resize(in.u64());
    for (auto& cuts : model_.binning.cuts) cuts = in.f64_vec();
    model_.log_prior = in.f64_vec();
    model_.log_likelihood.resize(model_.num_classes);
    for (std::size_t c = 0; c < model_.num_classes; ++c) {
        model_.log_likelihood[c].resize(model_.binning.cuts.size());
        for (auto& channel : model_.log_likelihood[c]) channel = in.f64_vec();
    }
}

} // namespace motordiag
