#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "motordiag/classifier.hpp"
#include "motordiag/features.hpp"
#include "motordiag/rng.hpp"

namespace motordiag {

/// CART node. channel < 0 marks a leaf; otherwise values <= threshold go left.
struct TreeNode {
    int channel = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::array<long long, 3> counts{}; // class counts of the node's training samples

    bool is_leaf() const { return channel < 0; }
};

struct DecisionTree {
    std::vector<TreeNode> nodes; // root at index 0

    const TreeNode& leaf_for(std::span<const double> x) const;
};

/// Gini impurity 1 - sum((c_i/total)^2). Throws on zero total.
double gini(std::span<const long long> counts);

struct TreeParams {
    int max_depth = -1;       // < 0: unlimited
    int min_samples_leaf = 1;
    int m_try = 11;           // channels sampled per split
};

/// Greedy CART on the given sample indices (duplicates allowed, as produced
/// by bootstrap draws). Splits maximize weighted Gini decrease over m_try
/// sampled channels with thresholds at midpoints of consecutive distinct
/// values; equal gains resolve to the lower channel, then lower threshold.
DecisionTree tree_fit(const Matrix& features, std::span<const int> labels, TreeParams params,
                      Rng& rng, std::span<const std::size_t> sample_indices = {});

std::array<double, 3> tree_predict_proba(const DecisionTree& tree, std::span<const double> x);

struct ForestParams {
    int n_estimators = 200;
    std::uint64_t seed = 42;
    TreeParams tree{.max_depth = -1, .min_samples_leaf = 1, .m_try = 4}; // ceil(sqrt(11))
};

/// Bagged forest: each tree fits a bootstrap resample under an independent
/// seed derived from (seed, tree index), so training order cannot change the
/// result. Prediction soft-votes the per-tree leaf class frequencies.
struct ForestModel {
    std::vector<DecisionTree> trees;
};

ForestModel forest_fit(const Matrix& features, std::span<const int> labels, ForestParams params);
std::array<double, 3> forest_predict_proba(const ForestModel& model, std::span<const double> x);

class ForestClassifier final : public Classifier {
public:
    explicit ForestClassifier(ForestParams params = {}) : params_(params) {}

    void fit(const Matrix& features, std::span<const int> labels) override;
    Probabilities predict_proba(std::span<const double> x) const override;

    std::string model_kind() const override { return "random-forest"; }
    void save(BinaryWriter& out) const override;
    void load(BinaryReader& in) override;

    const ForestModel& model() const { return model_; }

private:
    ForestParams params_;
    ForestModel model_;
};

} // namespace motordiag
