#include "motordiag/classifier.hpp"

namespace motordiag {

int argmax_class(const Probabilities& p) {
    int best = 0;
    for (int c = 1; c < kNumClasses; ++c) {
        if (p[static_cast<std::size_t>(c)] > p[static_cast<std::size_t>(best)]) best = c;
    }
    return best;
}

Probabilities nudge_winner(Probabilities p, int winner) {
    p[static_cast<std::size_t>(winner)] += 1e-9;
    double total = 0.0;
    for (double v : p) total += v;
    for (double& v : p) v /= total;
    return p;
}

std::vector<ConditionLabel> predict_all(const Classifier& model, const Matrix& features) {
    std::vector<ConditionLabel> out;
    out.reserve(features.rows());
    for (std::size_t i = 0; i < features.rows(); ++i) {
        out.push_back(model.predict(features.row(i)));
    }
    return out;
}

} // namespace motordiag
