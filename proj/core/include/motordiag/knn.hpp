#pragma once

#include <span>
#include <vector>

#include "motordiag/classifier.hpp"
#include "motordiag/features.hpp"

namespace motordiag {

/// Brute-force k nearest neighbors over z-scored features.
struct KnnModel {
    Matrix train; // scaled
    std::vector<int> labels;
    std::size_t k = 5;
};

KnnModel knn_fit(const Matrix& scaled_features, std::span<const int> labels, std::size_t k);

/// Majority vote over the k nearest neighbors by Euclidean distance.
/// Distance ties prefer the lower training index; vote ties prefer the tied
/// class with the smallest mean neighbor distance, then the lowest index.
std::vector<double> knn_predict_proba(const KnnModel& model, std::span<const double> x);

struct KnnParams {
    std::size_t k = 5;
};

class KnnClassifier final : public Classifier {
public:
    explicit KnnClassifier(KnnParams params = {}) : params_(params) {}

    void fit(const Matrix& features, std::span<const int> labels) override;
    Probabilities predict_proba(std::span<const double> x) const override;

    std::string model_kind() const override { return "knn"; }
    void save(BinaryWriter& out) const override;
    void load(BinaryReader& in) override;

    const KnnModel& model() const { return model_; }
    const ScalerParams& scaler() const { return scaler_; }

private:
    KnnParams params_;
    ScalerParams scaler_;
    KnnModel model_;
};

} // namespace motordiag
