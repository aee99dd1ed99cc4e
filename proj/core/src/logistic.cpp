#include "motordiag/logistic.hpp"

#include <algorithm>
#include <cmath>

#include "motordiag/archive.hpp"

namespace motordiag {

namespace {

void softmax_row(std::span<const double> scores, std::span<double> out) {
    double hi = scores[0];
    for (double s : scores) hi = std::max(hi, s);
    double sum = 0.0;
    for (std::size_t c = 0; c < scores.size(); ++c) {
        out[c] = std::exp(scores[c] - hi);
        sum += out[c];
    }
    for (std::size_t c = 0; c < scores.size(); ++c) out[c] /= sum;
}

} // namespace

double logreg_loss_grad(const Matrix& weights, const Matrix& features,
                        std::span<const int> labels, double lambda, Matrix& grad) {
    const std::size_t n = features.rows();
    const std::size_t d = features.cols();
    const std::size_t k = weights.rows();
    grad = Matrix(k, d + 1);

    double loss = 0.0;
    std::vector<double> scores(k), proba(k);
    for (std::size_t i = 0; i < n; ++i) {
        const auto x = features.row(i);
        for (std::size_t c = 0; c < k; ++c) {
            double s = weights(c, d); // bias
            for (std::size_t j = 0; j < d; ++j) s += weights(c, j) * x[j];
            scores[c] = s;
        }
        softmax_row(scores, proba);
        const auto y = static_cast<std::size_t>(labels[i]);
        loss -= std::log(std::max(proba[y], 1e-300));
        for (std::size_t c = 0; c < k; ++c) {
            const double r = proba[c] - (c == y ? 1.0 : 0.0);
            for (std::size_t j = 0; j < d; ++j) grad(c, j) += r * x[j];
            grad(c, d) += r;
        }
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    loss *= inv_n;
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t j = 0; j <= d; ++j) grad(c, j) *= inv_n;
    }
    // L2 on everything except the bias column
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t j = 0; j < d; ++j) {
            loss += 0.5 * lambda * weights(c, j) * weights(c, j);
            grad(c, j) += lambda * weights(c, j);
        }
    }
    return loss;
}

LogisticModel logreg_fit(const Matrix& scaled_features, std::span<const int> labels,
                         LogRegParams params) {
    if (scaled_features.rows() == 0) throw DataError("logreg_fit requires training data");
    if (scaled_features.rows() != labels.size()) throw DataError("feature/label count mismatch");

    const std::size_t d = scaled_features.cols();
    LogisticModel model;
    model.weights = Matrix(kNumClasses, d + 1);

    Matrix grad;
    double loss = logreg_loss_grad(model.weights, scaled_features, labels, params.lambda, grad);
    model.loss_history.push_back(loss);

    Matrix trial(kNumClasses, d + 1), trial_grad;
    for (std::size_t iter = 0; iter < params.max_iter; ++iter) {
        double grad_inf = 0.0, grad_sq = 0.0;
        for (double g : grad.data()) {
            grad_inf = std::max(grad_inf, std::abs(g));
            grad_sq += g * g;
        }
        if (grad_inf < params.grad_tol) break;

        // Armijo backtracking keeps the loss sequence non-increasing.
        double step = 1.0;
        double trial_loss = 0.0;
        bool accepted = false;
        for (int half = 0; half < 60; ++half) {
            for (std::size_t t = 0; t < trial.data().size(); ++t) {
                trial.data()[t] = model.weights.data()[t] - step * grad.data()[t];
            }
            trial_loss =
                logreg_loss_grad(trial, scaled_features, labels, params.lambda, trial_grad);
            if (trial_loss <= loss - 1e-4 * step * grad_sq) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break; // no descent step representable, gradient is numerically flat
        model.weights = trial;
        grad = trial_grad;
        loss = trial_loss;
        model.loss_history.push_back(loss);
    }
    return model;
}

std::vector<double> logreg_predict_proba(const LogisticModel& model, std::span<const double> x) {
    const std::size_t k = model.weights.rows();
    const std::size_t d = model.weights.cols() - 1;
    std::vector<double> scores(k), proba(k);
    for (std::size_t c = 0; c < k; ++c) {
        double s = model.weights(c, d);
        for (std::size_t j = 0; j < d; ++j) s += model.weights(c, j) * x[j];
        scores[c] = s;
    }
    softmax_row(scores, proba);
    return proba;
}

void LogRegClassifier::fit(const Matrix& features, std::span<const int> labels) {
    scaler_ = fit_scaler(features);
    model_ = logreg_fit(apply_scaler(scaler_, features), labels, params_);
}

Probabilities LogRegClassifier::predict_proba(std::span<const double> x) const {
    const FeatureVector xs = apply_scaler(scaler_, x);
    const auto p = logreg_predict_proba(model_, xs);
    return {p[0], p[1], p[2]};
}

void LogRegClassifier::save(BinaryWriter& out) const {
    out.u64(params_.max_iter);
    out.f64(params_.lambda);
    out.f64(params_.grad_tol);
    out.u64(params_.seed);
    out.f64_vec(scaler_.mean);
    out.f64_vec(scaler_.std);
    out.u64(model_.weights.rows());
    out.u64(model_.weights.cols());
    out.f64_vec(model_.weights.data());
}

void LogRegClassifier::load(BinaryReader& in) {
    params_.max_iter = in.u64();
    params_.lambda = in.f64();
    params_.grad_tol = in.f64();
    params_.seed = in.u64();
    auto mean = in.f64_vec();
    auto sd = in.f64_vec();
    std::copy(mean.begin(), mean.end(), scaler_.mean.begin());
    std::copy(sd.begin(), sd.end(), scaler_.std.begin());
    const std::size_t rows = in.u64();
    const std::size_t cols = in.u64();
    model_ = {};
    model_.weights = Matrix(rows, cols);
    model_.weights.data() = in.f64_vec();
    if (model_.weights.data().size() != rows * cols) throw ArchiveError("weight size mismatch");
}

} // namespace motordiag
