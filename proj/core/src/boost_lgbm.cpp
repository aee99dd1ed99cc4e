#include <algorithm>
#include <cmath>
#include <numeric>

#include "motordiag/boosting.hpp"

namespace motordiag {

namespace {

struct LgbmSplit {
    int channel = -1;
    std::size_t bin = 0; // bins <= bin go left
    double threshold = 0.0;
    double gain = -1.0;
};

struct LeafState {
    int node_id = 0;
    std::vector<std::size_t> indices;
    double g_sum = 0.0;
    double h_sum = 0.0;
    LgbmSplit best;
};

class LgbmTreeBuilder {
public:
    LgbmTreeBuilder(const std::vector<std::vector<std::uint16_t>>& binned, const BinMapper& mapper,
                    std::span<const double> g, std::span<const double> h, const LgbmParams& params)
        : binned_(binned), mapper_(mapper), g_(g), h_(h), params_(params) {}

    /// Leaf-wise growth: repeatedly split the leaf with the highest gain.
    /// leaf_of[i] receives the final node id for every training sample.
    RegressionTree build(std::vector<int>& leaf_of) {
        const std::size_t n = g_.size();
        RegressionTree tree;

        LeafState root;
        root.node_id = 0;
        root.indices.resize(n);
        std::iota(root.indices.begin(), root.indices.end(), std::size_t{0});
        for (std::size_t i = 0; i < n; ++i) {
            root.g_sum += g_[i];
            root.h_sum += h_[i];
        }
        RegressionTreeNode root_node;
        root_node.n_samples = static_cast<long long>(n);
        root_node.weight = xgb_leaf_weight(root.g_sum, root.h_sum, params_.lambda);
        tree.nodes.push_back(root_node);
        find_best(root);

        std::vector<LeafState> leaves;
        leaves.push_back(std::move(root));

        while (static_cast<int>(leaves.size()) < params_.max_leaves) {
            // earliest-created leaf wins gain ties
            int pick = -1;
            for (std::size_t t = 0; t < leaves.size(); ++t) {
                if (leaves[t].best.channel < 0) continue;
                if (pick < 0 ||
                    leaves[t].best.gain > leaves[static_cast<std::size_t>(pick)].best.gain) {
                    pick = static_cast<int>(t);
                }
            }
            if (pick < 0) break;
            split_leaf(leaves, static_cast<std::size_t>(pick), tree);
        }

        for (const LeafState& leaf : leaves) {
            for (std::size_t idx : leaf.indices) leaf_of[idx] = leaf.node_id;
        }
        return tree;
    }

private:
    void find_best(LeafState& leaf) {
        leaf.best = {};
        if (leaf.indices.size() < 2 * static_cast<std::size_t>(params_.min_data_in_leaf)) {
            return;
        }
        for (std::size_t channel = 0; channel < binned_.size(); ++channel) {
            const std::size_t nbins = mapper_.bins(channel);
            hist_g_.assign(nbins, 0.0);
            hist_h_.assign(nbins, 0.0);
            hist_n_.assign(nbins, 0);
            for (std::size_t idx : leaf.indices) {
                const std::uint16_t b = binned_[channel][idx];
                hist_g_[b] += g_[idx];
                hist_h_[b] += h_[idx];
                ++hist_n_[b];
            }
            double gl = 0.0, hl = 0.0;
            long long nl = 0;
            for (std::size_t b = 0; b + 1 < nbins; ++b) {
                gl += hist_g_[b];
                hl += hist_h_[b];
                nl += hist_n_[b];
                const long long nr = static_cast<long long>(leaf.indices.size()) - nl;
                if (nl < params_.min_data_in_leaf || nr < params_.min_data_in_leaf) continue;
                const double gain = xgb_split_gain(gl, hl, leaf.g_sum - gl, leaf.h_sum - hl,
                                                   params_.lambda, 0.0);
                if (gain < params_.min_split_gain) continue;
                if (gain > leaf.best.gain) {
                    leaf.best.gain = gain;
                    leaf.best.channel = static_cast<int>(channel);
                    leaf.best.bin = b;
                    leaf.best.threshold = mapper_.upper_bounds[channel][b];
                }
            }
        }
    }

    void split_leaf(std::vector<LeafState>& leaves, std::size_t pick, RegressionTree& tree) {
        LeafState leaf = std::move(leaves[pick]);
        const LgbmSplit& split = leaf.best;

        LeafState left, right;
        left.node_id = static_cast<int>(tree.nodes.size());
        right.node_id = left.node_id + 1;
        for (std::size_t idx : leaf.indices) {
            const bool go_left =
                binned_[static_cast<std::size_t>(split.channel)][idx] <= split.bin;
            LeafState& child = go_left ? left : right;
            child.indices.push_back(idx);
            child.g_sum += g_[idx];
            child.h_sum += h_[idx];
        }

        auto& parent = tree.nodes[static_cast<std::size_t>(leaf.node_id)];
        parent.channel = split.channel;
        parent.threshold = split.threshold;
        parent.default_left = true;
        parent.left = left.node_id;
        parent.right = right.node_id;
        parent.split_gain = split.gain;

        for (LeafState* child : {&left, &right}) {
            RegressionTreeNode node;
            node.n_samples = static_cast<long long>(child->indices.size());
            node.weight = xgb_leaf_weight(child->g_sum, child->h_sum, params_.lambda);
            tree.nodes.push_back(node);
            find_best(*child);
        }
        leaves[pick] = std::move(left);
        leaves.push_back(std::move(right));
    }

    const std::vector<std::vector<std::uint16_t>>& binned_;
    const BinMapper& mapper_;
    std::span<const double> g_;
    std::span<const double> h_;
    const LgbmParams& params_;
    std::vector<double> hist_g_, hist_h_;
    std::vector<long long> hist_n_;
};

} // namespace

BoostedEnsemble lgbm_fit(const Matrix& features, std::span<const int> labels, LgbmParams params) {
    if (features.rows() == 0) throw DataError("lgbm_fit requires training data");
    if (params.rounds < 1) throw DataError("rounds must be >= 1");
    const std::size_t n = features.rows();

    const BinMapper mapper = BinMapper::fit(features, params.max_bins);
    std::vector<std::vector<std::uint16_t>> binned(features.cols());
    for (std::size_t j = 0; j < features.cols(); ++j) {
        binned[j].resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            binned[j][i] = static_cast<std::uint16_t>(mapper.bin(j, features(i, j)));
        }
    }

    BoostedEnsemble ensemble;
    ensemble.variant = BoostVariant::lgbm;
    ensemble.learning_rate = params.learning_rate;

    Matrix scores(n, 3);
    std::vector<double> g_col(n), h_col(n);
    std::vector<int> leaf_of(n);
    for (int round = 0; round < params.rounds; ++round) {
        const SoftmaxStats stats = softmax_grad_hess(scores, labels);
        std::array<RegressionTree, 3> group;
        for (std::size_t c = 0; c < 3; ++c) {
            for (std::size_t i = 0; i < n; ++i) {
                g_col[i] = stats.g(i, c);
                h_col[i] = stats.h(i, c);
            }
            LgbmTreeBuilder builder(binned, mapper, g_col, h_col, params);
            group[c] = builder.build(leaf_of);
            for (std::size_t i = 0; i < n; ++i) {
                scores(i, c) += params.learning_rate *
                                group[c].nodes[static_cast<std::size_t>(leaf_of[i])].weight;
            }
        }
        ensemble.tree_groups.push_back(std::move(group));
        ensemble.train_loss.push_back(softmax_grad_hess(scores, labels).loss);
    }
    return ensemble;
}

} // namespace motordiag
