#include "motordiag/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "motordiag/archive.hpp"

namespace motordiag {

namespace {

constexpr double kGainEps = 1e-12;

struct SplitChoice {
    int channel = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

std::array<long long, 3> count_classes(std::span<const int> labels,
                                       std::span<const std::size_t> indices) {
    std::array<long long, 3> counts{};
    for (std::size_t idx : indices) ++counts[static_cast<std::size_t>(labels[idx])];
    return counts;
}

double gini_from(const std::array<long long, 3>& counts, long long total) {
    double g = 1.0;
    for (long long c : counts) {
        const double p = static_cast<double>(c) / static_cast<double>(total);
        g -= p * p;
    }
    return g;
}

/// Draws m distinct channels in ascending order; ascending evaluation makes
/// equal-gain ties land on the lower channel index.
std::vector<int> sample_channels(std::size_t total, int m, Rng& rng) {
    std::vector<int> channels(total);
    std::iota(channels.begin(), channels.end(), 0);
    for (int t = 0; t < m && t + 1 < static_cast<int>(total); ++t) {
        const auto j = static_cast<std::size_t>(t) + rng.below(total - static_cast<std::size_t>(t));
        std::swap(channels[static_cast<std::size_t>(t)], channels[j]);
    }
    channels.resize(std::min<std::size_t>(static_cast<std::size_t>(m), total));
    std::sort(channels.begin(), channels.end());
    return channels;
}

class TreeBuilder {
public:
    TreeBuilder(const Matrix& x, std::span<const int> y, TreeParams params, Rng& rng)
        : x_(x), y_(y), params_(params), rng_(rng) {}

    int build(std::vector<std::size_t>& indices, int depth, std::vector<TreeNode>& nodes) {
        const auto counts = count_classes(y_, indices);
        const auto total = static_cast<long long>(indices.size());

        TreeNode node;
        node.counts = counts;
        const bool pure = std::count(counts.begin(), counts.end(), 0LL) >= 2;
        const bool depth_capped = params_.max_depth >= 0 && depth >= params_.max_depth;
        SplitChoice best;
        if (!pure && !depth_capped && total >= 2 * params_.min_samples_leaf) {
            best = find_split(indices, counts, total);
        }
        const int node_id = static_cast<int>(nodes.size());
        nodes.push_back(node);
        if (best.channel < 0) return node_id; // leaf

        std::vector<std::size_t> left, right;
        for (std::size_t idx : indices) {
            (x_(idx, static_cast<std::size_t>(best.channel)) <= best.threshold ? left : right)
                .push_back(idx);
        }
        indices.clear();
        indices.shrink_to_fit();
        nodes[static_cast<std::size_t>(node_id)].channel = best.channel;
        nodes[static_cast<std::size_t>(node_id)].threshold = best.threshold;
        const int l = build(left, depth + 1, nodes);
        nodes[static_cast<std::size_t>(node_id)].left = l;
        const int r = build(right, depth + 1, nodes);
        nodes[static_cast<std::size_t>(node_id)].right = r;
        return node_id;
    }

private:
    SplitChoice find_split(const std::vector<std::size_t>& indices,
                           const std::array<long long, 3>& counts, long long total) {
        SplitChoice best;
        const double parent = gini_from(counts, total);
        const auto channels = sample_channels(x_.cols(), params_.m_try, rng_);

        std::vector<std::pair<double, int>> values(indices.size());
        for (int channel : channels) {
            for (std::size_t t = 0; t < indices.size(); ++t) {
                values[t] = {x_(indices[t], static_cast<std::size_t>(channel)), y_[indices[t]]};
            }
            std::sort(values.begin(), values.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });

            std::array<long long, 3> left_counts{};
            long long left_total = 0;
            for (std::size_t t = 0; t + 1 < values.size(); ++t) {
                ++left_counts[static_cast<std::size_t>(values[t].second)];
                ++left_total;
                if (values[t].first == values[t + 1].first) continue;
                const long long right_total = total - left_total;
                if (left_total < params_.min_samples_leaf ||
                    right_total < params_.min_samples_leaf) {
                    continue;
                }
                std::array<long long, 3> right_counts{};
                for (std::size_t c = 0; c < 3; ++c) right_counts[c] = counts[c] - left_counts[c];
                const double child =
                    (static_cast<double>(left_total) * gini_from(left_counts, left_total) +
                     static_cast<double>(right_total) * gini_from(right_counts, right_total)) /
                    static_cast<double>(total);
                const double gain = parent - child;
                if (gain > best.gain + kGainEps) {
                    best.gain = gain;
                    best.channel = channel;
                    best.threshold = values[t].first + 0.5 * (values[t + 1].first - values[t].first);
                }
            }
        }
        if (best.gain <= kGainEps) best.channel = -1;
        return best;
    }

    const Matrix& x_;
    std::span<const int> y_;
    TreeParams params_;
    Rng& rng_;
};

} // namespace

double gini(std::span<const long long> counts) {
    long long total = 0;
    for (long long c : counts) total += c;
    if (total <= 0) throw DataError("gini requires a positive total count");
    double g = 1.0;
    for (long long c : counts) {
        const double p = static_cast<double>(c) / static_cast<double>(total);
        g -= p * p;
    }
    return g;
}

const TreeNode& DecisionTree::leaf_for(std::span<const double> x) const {
    const TreeNode* node = &nodes[0];
    while (!node->is_leaf()) {
        const int next =
            x[static_cast<std::size_t>(node->channel)] <= node->threshold ? node->left : node->right;
        node = &nodes[static_cast<std::size_t>(next)];
    }
    return *node;
}

DecisionTree tree_fit(const Matrix& features, std::span<const int> labels, TreeParams params,
                      Rng& rng, std::span<const std::size_t> sample_indices) {
    if (features.rows() == 0) throw DataError("tree_fit requires training data");
    std::vector<std::size_t> indices;
    if (sample_indices.empty()) {
        indices.resize(features.rows());
        std::iota(indices.begin(), indices.end(), std::size_t{0});
    } else {
        indices.assign(sample_indices.begin(), sample_indices.end());
    }
    DecisionTree tree;
    TreeBuilder builder(features, labels, params, rng);
    builder.build(indices, 0, tree.nodes);
    return tree;
}

std::array<double, 3> tree_predict_proba(const DecisionTree& tree, std::span<const double> x) {
    const TreeNode& leaf = tree.leaf_for(x);
    long long total = 0;
    for (long long c : leaf.counts) total += c;
    std::array<double, 3> proba{};
    for (std::size_t c = 0; c < 3; ++c) {
        proba[c] = static_cast<double>(leaf.counts[c]) / static_cast<double>(total);
    }
    return proba;
}

ForestModel forest_fit(const Matrix& features, std::span<const int> labels, ForestParams params) {
    if (features.rows() == 0) throw DataError("forest_fit requires training data");
    const std::size_t n = features.rows();
    ForestModel model;
    model.trees.resize(static_cast<std::size_t>(params.n_estimators));
    for (int t = 0; t < params.n_estimators; ++t) {
        Rng rng(mix_seed(params.seed, static_cast<std::uint64_t>(t)));
        std::vector<std::size_t> bootstrap(n);
        for (std::size_t i = 0; i < n; ++i) bootstrap[i] = rng.below(n);
        model.trees[static_cast<std::size_t>(t)] =
            tree_fit(features, labels, params.tree, rng, bootstrap);
    }
    return model;
}

std::array<double, 3> forest_predict_proba(const ForestModel& model, std::span<const double> x) {
    std::array<double, 3> proba{};
    for (const DecisionTree& tree : model.trees) {
        const auto p = tree_predict_proba(tree, x);
        for (std::size_t c = 0; c < 3; ++c) proba[c] += p[c];
    }
    for (double& p : proba) p /= static_cast<double>(model.trees.size());
    return proba;
}

void ForestClassifier::fit(const Matrix& features, std::span<const int> labels) {
    model_ = forest_fit(features, labels, params_);
}

Probabilities ForestClassifier::predict_proba(std::span<const double> x) const {
    return forest_predict_proba(model_, x);
}

void ForestClassifier::save(BinaryWriter& out) const {
    out.i64(params_.n_estimators);
    out.u64(params_.seed);
    out.i64(params_.tree.max_depth);
    out.i64(params_.tree.min_samples_leaf);
    out.i64(params_.tree.m_try);
    out.u64(model_.trees.size());
    for (const DecisionTree& tree : model_.trees) {
        out.u64(tree.nodes.size());
        for (const TreeNode& node : tree.nodes) {
            out.i64(node.channel);
            out.f64(node.threshold);
            out.i64(node.left);
            out.i64(node.right);
            for (long long c : node.counts) out.i64(c);
        }
    }
}

void ForestClassifier::load(BinaryReader& in) {
    params_.n_estimators = static_cast<int>(in.i64());
    params_.seed = in.u64();
    params_.tree.max_depth = static_cast<int>(in.i64());
    params_.tree.min_samples_leaf = static_cast<int>(in.i64());
    params_.tree.m_try = static_cast<int>(in.i64());
    model_ = {};
    model_.trees.resize(in.u64());
    for (DecisionTree& tree : model_.trees) {
        tree.nodes.resize(in.u64());
        for (TreeNode& node : tree.nodes) {
            node.channel = static_cast<int>(in.i64());
            node.threshold = in.f64();
            node.left = static_cast<int>(in.i64());
            node.right = static_cast<int>(in.i64());
            for (long long& c : node.counts) c = in.i64();
        }
    }
}

} // namespace motordiag
