#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "motordiag/classifier.hpp"
#include "motordiag/features.hpp"

namespace motordiag {

/// Per-channel quantile discretization. Cut points are strictly increasing;
/// value v falls in bin = number of cut points <= v.
struct BinningRule {
    std::vector<std::vector<double>> cuts; // one ascending list per channel

    std::size_t num_channels() const { return cuts.size(); }
    std::size_t bins(std::size_t channel) const { return cuts[channel].size() + 1; }
    std::size_t bin(std::size_t channel, double value) const;
};

BinningRule fit_quantile_bins(const Matrix& features, std::size_t max_bins);

/// Discrete-feature Bayes classifier over binned channels with Laplace
/// smoothing. Internally generic in the class count so the arithmetic can be
/// exercised on small hand-checkable problems.
struct NaiveBayesModel {
    std::size_t num_classes = 0;
    BinningRule binning;
    std::vector<double> log_prior;                              // class
    std::vector<std::vector<std::vector<double>>> log_likelihood; // class x channel x bin
};

NaiveBayesModel nb_fit(const Matrix& features, std::span<const int> labels,
                       std::size_t num_classes, std::size_t bins, double alpha);
std::vector<double> nb_predict_proba(const NaiveBayesModel& model, std::span<const double> x);

struct NaiveBayesParams {
    std::size_t bins = 8;
    double alpha = 1.0;
};

class NaiveBayesClassifier final : public Classifier {
public:
    explicit NaiveBayesClassifier(NaiveBayesParams params = {}) : params_(params) {}

    void fit(const Matrix& features, std::span<const int> labels) override;
    Probabilities predict_proba(std::span<const double> x) const override;

    std::string model_kind() const override { return "naive-bayes"; }
    void save(BinaryWriter& out) const override;
    void load(BinaryReader& in) override;

    const NaiveBayesModel& model() const { return model_; }

private:
    NaiveBayesParams params_;
    NaiveBayesModel model_;
};

} // namespace motordiag
