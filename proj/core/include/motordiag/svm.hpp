#pragma once

#include <array>
#include <span>
#include <vector>

#include "motordiag/classifier.hpp"
#include "motordiag/features.hpp"

namespace motordiag {

enum class KernelKind : int { linear = 0, polynomial = 1, sigmoid = 2, rbf = 3 };

/// Kernel plus trainer parameters for one SVM configuration.
struct KernelSpec {
    KernelKind kind = KernelKind::linear;
    int degree = 3;       // polynomial only
    double gamma = 1.0;   // polynomial / sigmoid / rbf
    double coef0 = 0.0;   // polynomial / sigmoid
    double c = 1.0;       // box constraint
    int max_iter = 1000;  // cap on SMO pair updates (each update scans all samples)
    bool gamma_scale = false; // resolve gamma as 1/(channels * mean channel variance) at fit

    bool operator==(const KernelSpec&) const = default;
};

double kernel_eval(const KernelSpec& spec, std::span<const double> x, std::span<const double> z);

/// Soft-margin binary SVM in dual form. coef[i] = alpha_i * y_i over the
/// retained support vectors; decision f(x) = sum coef_i K(sv_i, x) + bias.
struct BinarySvmModel {
    Matrix support_vectors;
    std::vector<double> coef;
    double bias = 0.0;
    KernelSpec spec;

    // full dual solution, kept for feasibility checks
    std::vector<double> alpha;
    std::vector<int> train_y; // +/-1
};

/// SMO with maximal-violating-pair selection. Stops when the largest KKT
/// violation drops below tol or after spec.max_iter pair updates.
BinarySvmModel smo_fit_binary(const Matrix& scaled_features, std::span<const int> y,
                              KernelSpec spec, double tol = 1e-3);

double svm_decision(const BinarySvmModel& model, std::span<const double> x);

/// One-vs-one lift: pairwise models in fixed order (H|B, H|PM, B|PM).
struct MulticlassSvmModel {
    std::vector<BinarySvmModel> pairwise;
};

MulticlassSvmModel svm_fit(const Matrix& scaled_features, std::span<const int> labels,
                           KernelSpec spec);

/// Majority vote over pairwise decisions. Probabilities are vote shares with
/// an epsilon smoothing; a vote tie is resolved toward the tied class with the
/// largest summed |f| margin, then the lowest index.
Probabilities svm_predict_proba(const MulticlassSvmModel& model, std::span<const double> x);

class SvmClassifier final : public Classifier {
public:
    explicit SvmClassifier(KernelSpec spec) : spec_(spec) {}

    void fit(const Matrix& features, std::span<const int> labels) override;
    Probabilities predict_proba(std::span<const double> x) const override;

    std::string model_kind() const override { return "svm"; }
    void save(BinaryWriter& out) const override;
    void load(BinaryReader& in) override;

    const MulticlassSvmModel& model() const { return model_; }

private:
    KernelSpec spec_;
    ScalerParams scaler_;
    MulticlassSvmModel model_;
};

} // namespace motordiag
