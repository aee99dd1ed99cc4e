#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "motordiag/classifier.hpp"
#include "motordiag/features.hpp"

namespace motordiag {

/// Softmax regression weights: kNumClasses x (channels + 1), bias in the last
/// column. Inputs are expected to be z-scored.
struct LogisticModel {
    Matrix weights;
    std::vector<double> loss_history; // training loss per accepted step
};

/// Mean softmax cross-entropy over `features` (already bias-augmented is NOT
/// expected; the bias column is handled internally) plus (lambda/2)*||w||^2
/// excluding bias. Fills `grad` with the exact gradient and returns the loss.
double logreg_loss_grad(const Matrix& weights, const Matrix& features,
                        std::span<const int> labels, double lambda, Matrix& grad);

struct LogRegParams {
    std::size_t max_iter = 1000;
    double lambda = 1e-4;
    double grad_tol = 1e-6;
    std::uint64_t seed = 42; // interface parity; the solver is deterministic
};

/// Full-batch gradient descent with Armijo backtracking from zero weights.
LogisticModel logreg_fit(const Matrix& scaled_features, std::span<const int> labels,
                         LogRegParams params = {});

std::vector<double> logreg_predict_proba(const LogisticModel& model, std::span<const double> x);

class LogRegClassifier final : public Classifier {
public:
    explicit LogRegClassifier(LogRegParams params = {}) : params_(params) {}

    void fit(const Matrix& features, std::span<const int> labels) override;
    Probabilities predict_proba(std::span<const double> x) const override;

    std::string model_kind() const override { return "logreg"; }
    void save(BinaryWriter& out) const override;
    void load(BinaryReader& in) override;

    const LogisticModel& model() const { return model_; }

private:
    LogRegParams params_;
    ScalerParams scaler_;
    LogisticModel model_;
};

} // namespace motordiag
