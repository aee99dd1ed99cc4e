#pragma once

#include <array>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "motordiag/dataset.hpp"
#include "motordiag/features.hpp"

namespace motordiag {

using Probabilities = std::array<double, 3>;

/// Index of the largest probability; ties go to the lowest class index.
int argmax_class(const Probabilities& p);

/// Nudges `winner` by +1e-9 and renormalizes. Models whose tie-break rule is
/// richer than "lowest index" (k-NN mean distance, SVM vote margin) apply it
/// so that predict() stays exactly argmax of predict_proba().
Probabilities nudge_winner(Probabilities p, int winner);

class BinaryWriter;
class BinaryReader;

/// Common surface of all eleven model configurations. fit/predict operate on
/// raw encoded features; models that need z-scored inputs own their scaler.
class Classifier {
public:
    virtual ~Classifier() = default;

    virtual void fit(const Matrix& features, std::span<const int> labels) = 0;
    virtual Probabilities predict_proba(std::span<const double> x) const = 0;

    ConditionLabel predict(std::span<const double> x) const {
        return label_from_index(argmax_class(predict_proba(x)));
    }

    /// Payload tag + payload for model archives.
    virtual std::string model_kind() const = 0;
    virtual void save(BinaryWriter& out) const = 0;
    virtual void load(BinaryReader& in) = 0;
};

std::vector<ConditionLabel> predict_all(const Classifier& model, const Matrix& features);

} // namespace motordiag
