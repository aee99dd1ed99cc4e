#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "motordiag/classifier.hpp"
#include "motordiag/features.hpp"

namespace motordiag {

/// Multiclass softmax objective: per-sample probabilities p = softmax(scores),
/// gradient g = p - onehot(label), diagonal hessian h = p(1-p), and
/// loss = -mean log p_true.
struct SoftmaxStats {
    Matrix g; // n x 3
    Matrix h; // n x 3
    double loss = 0.0;
};

SoftmaxStats softmax_grad_hess(const Matrix& scores, std::span<const int> labels);

/// Newton leaf weight -G/(H+lambda).
double xgb_leaf_weight(double g_sum, double h_sum, double lambda);

/// Second-order split gain
/// 0.5*[GL^2/(HL+l) + GR^2/(HR+l) - (GL+GR)^2/(HL+HR+l)] - gamma.
double xgb_split_gain(double gl, double hl, double gr, double hr, double lambda, double gamma);

/// Quantile bin boundaries per channel. Value v lands in the first bin whose
/// upper bound is >= v; the last bound is +inf. When a channel has at most
/// max_bins distinct values every distinct value gets its own bin, so binned
/// split search coincides with exact search.
struct BinMapper {
    std::vector<std::vector<double>> upper_bounds;

    static BinMapper fit(const Matrix& features, std::size_t max_bins);
    static std::vector<double> fit_column(std::vector<double> values, std::size_t max_bins);

    std::size_t bins(std::size_t channel) const { return upper_bounds[channel].size(); }
    std::size_t bin(std::size_t channel, double value) const;
};

/// Regression tree with learned default direction for missing values
/// (a CR reading is missing when its OPEN flag is set).
struct RegressionTreeNode {
    int channel = -1;
    double threshold = 0.0;
    bool default_left = true;
    int left = -1;
    int right = -1;
    double weight = 0.0;
    long long n_samples = 0;
    double split_gain = 0.0;

    bool is_leaf() const { return channel < 0; }
};

struct RegressionTree {
    std::vector<RegressionTreeNode> nodes;

    /// respect_missing routes OPEN-flagged CR values along default_left.
    double value_at(std::span<const double> x, bool respect_missing) const;
};

/// Depth-`depth` tree whose levels share one condition each; 2^depth leaves
/// holding one value per class.
struct ObliviousLevel {
    int channel = 0; // expanded space: 0..9 raw channels, 10..12 sound target stats
    double threshold = 0.0;
};

struct ObliviousTree {
    std::vector<ObliviousLevel> levels;
    std::vector<std::array<double, 3>> leaves;
};

/// Running category -> label statistics where the statistic for a sample uses
/// only samples observed before it: (count_class + a*p) / (count + a).
class OrderedTargetStats {
public:
    OrderedTargetStats(double prior_weight, double prior_value)
        : prior_weight_(prior_weight), prior_value_(prior_value) {}

    double statistic(int category, int class_index) const;
    void observe(int category, int class_index);

private:
    double prior_weight_;
    double prior_value_;
    std::map<int, std::pair<long long, std::array<long long, 3>>> seen_;
};

enum class BoostVariant : int { xgb = 0, lgbm = 1, cat = 2 };

struct BoostedEnsemble {
    BoostVariant variant = BoostVariant::xgb;
    std::array<double, 3> base_score{};
    double learning_rate = 0.1;
    std::vector<std::array<RegressionTree, 3>> tree_groups; // xgb / lgbm
    std::vector<ObliviousTree> oblivious_trees;             // cat
    std::array<std::array<double, 3>, 2> sound_target_stats{}; // cat: per category
    std::vector<double> train_loss; // multiclass log-loss after each round
};

std::array<double, 3> boosted_scores(const BoostedEnsemble& ensemble, std::span<const double> x);
Probabilities boosted_predict_proba(const BoostedEnsemble& ensemble, std::span<const double> x);

void save_ensemble(BinaryWriter& out, const BoostedEnsemble& ensemble);
BoostedEnsemble load_ensemble(BinaryReader& in);

struct XgbParams {
    int rounds = 100;
    double learning_rate = 0.3;
    double lambda = 1.0;
    double gamma = 0.0;
    int max_depth = 6;
    std::uint64_t seed = 42;
};

/// Exact greedy second-order boosting, one regression tree per class per
/// round; OPEN-flagged CR values follow a learned default direction.
BoostedEnsemble xgb_fit(const Matrix& features, std::span<const int> labels, XgbParams params);

struct LgbmParams {
    int rounds = 100;
    double learning_rate = 0.1;
    int max_leaves = 31;
    int min_data_in_leaf = 10;
    double min_split_gain = 0.01;
    std::size_t max_bins = 255;
    double lambda = 1.0;
};

/// Histogram boosting with leaf-wise growth: always split the leaf with the
/// best gain; a split is rejected if either child would hold fewer than
/// min_data_in_leaf samples or its gain is below min_split_gain.
BoostedEnsemble lgbm_fit(const Matrix& features, std::span<const int> labels, LgbmParams params);

struct CatParams {
    int rounds = 70;
    double learning_rate = 0.01;
    int depth = 6;
    int n_permutations = 4;
    std::uint64_t seed = 42;
    double lambda = 1.0;
    std::size_t max_bins = 64;
    double prior_weight = 1.0;
    double prior_value = 1.0 / 3.0;
};

/// Ordered boosting with oblivious trees. The SOUND channel is consumed as a
/// categorical through per-class ordered target statistics under seed-derived
/// permutations; per-permutation score arrays keep each sample's residual
/// free of its own label; the retained tree per round averages the
/// permutation models' leaf values.
BoostedEnsemble cat_fit(const Matrix& features, std::span<const int> labels, CatParams params);

template <typename Params>
class BoostedClassifier final : public Classifier {
public:
    explicit BoostedClassifier(Params params = {}) : params_(params) {}

    void fit(const Matrix& features, std::span<const int> labels) override {
        if constexpr (std::is_same_v<Params, XgbParams>) {
            model_ = xgb_fit(features, labels, params_);
        } else if constexpr (std::is_same_v<Params, LgbmParams>) {
            model_ = lgbm_fit(features, labels, params_);
        } else {
            model_ = cat_fit(features, labels, params_);
        }
    }

    Probabilities predict_proba(std::span<const double> x) const override {
        return boosted_predict_proba(model_, x);
    }

    std::string model_kind() const override;
    void save(BinaryWriter& out) const override;
    void load(BinaryReader& in) override;

    const BoostedEnsemble& model() const { return model_; }

private:
    Params params_;
    BoostedEnsemble model_;
};

using XgbClassifier = BoostedClassifier<XgbParams>;
using LgbmClassifier = BoostedClassifier<LgbmParams>;
using CatClassifier = BoostedClassifier<CatParams>;

} // namespace motordiag
