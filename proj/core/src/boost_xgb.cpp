#include <algorithm>
#include <cmath>
#include <numeric>

#include "motordiag/boosting.hpp"

namespace motordiag {

namespace {

constexpr double kGainEps = 1e-12;

/// CR channels treat OPEN-flagged readings as missing.
int missing_flag_channel(std::size_t channel) {
    if (channel >= feat::kCr && channel < feat::kCr + 3) {
        return static_cast<int>(feat::kOpen + (channel - feat::kCr));
    }
    return -1;
}

struct XgbSplit {
    int channel = -1;
    double threshold = 0.0;
    bool default_left = true;
    double gain = 0.0;
};

class XgbTreeBuilder {
public:
    XgbTreeBuilder(const Matrix& x, std::span<const double> g, std::span<const double> h,
                   const XgbParams& params)
        : x_(x), g_(g), h_(h), params_(params) {}

    RegressionTree build() {
        std::vector<std::size_t> indices(x_.rows());
        std::iota(indices.begin(), indices.end(), std::size_t{0});
        RegressionTree tree;
        grow(indices, 0, tree.nodes);
        return tree;
    }

private:
    int grow(std::vector<std::size_t>& indices, int depth,
             std::vector<RegressionTreeNode>& nodes) {
        double g_sum = 0.0, h_sum = 0.0;
        for (std::size_t idx : indices) {
            g_sum += g_[idx];
            h_sum += h_[idx];
        }
        RegressionTreeNode node;
        node.n_samples = static_cast<long long>(indices.size());
        node.weight = xgb_leaf_weight(g_sum, h_sum, params_.lambda);

        XgbSplit best;
        if (depth < params_.max_depth && indices.size() >= 2) {
            best = find_split(indices, g_sum, h_sum);
        }
        const int node_id = static_cast<int>(nodes.size());
        nodes.push_back(node);
        if (best.channel < 0) return node_id;

        std::vector<std::size_t> left, right;
        for (std::size_t idx : indices) {
            const int flag = missing_flag_channel(static_cast<std::size_t>(best.channel));
            bool go_left;
            if (flag >= 0 && x_(idx, static_cast<std::size_t>(flag)) == 1.0) {
                go_left = best.default_left;
            } else {
                go_left = x_(idx, static_cast<std::size_t>(best.channel)) <= best.threshold;
            }
            (go_left ? left : right).push_back(idx);
        }
        indices.clear();
        indices.shrink_to_fit();

        auto& stored = nodes[static_cast<std::size_t>(node_id)];
        stored.channel = best.channel;
        stored.threshold = best.threshold;
        stored.default_left = best.default_left;
        stored.split_gain = best.gain;
        const int l = grow(left, depth + 1, nodes);
        nodes[static_cast<std::size_t>(node_id)].left = l;
        const int r = grow(right, depth + 1, nodes);
        nodes[static_cast<std::size_t>(node_id)].right = r;
        return node_id;
    }

    XgbSplit find_split(const std::vector<std::size_t>& indices, double g_total, double h_total) {
        XgbSplit best;
        best.gain = kGainEps;
        std::vector<std::pair<double, std::size_t>> present;
        present.reserve(indices.size());
        for (std::size_t channel = 0; channel < x_.cols(); ++channel) {
            const int flag = missing_flag_channel(channel);
            present.clear();
            double g_miss = 0.0, h_miss = 0.0;
            for (std::size_t idx : indices) {
                if (flag >= 0 && x_(idx, static_cast<std::size_t>(flag)) == 1.0) {
                    g_miss += g_[idx];
                    h_miss += h_[idx];
                } else {
                    present.emplace_back(x_(idx, channel), idx);
                }
            }
            if (present.size() < 2) continue;
            std::sort(present.begin(), present.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });

            double gl = 0.0, hl = 0.0;
            const double g_present = g_total - g_miss;
            const double h_present = h_total - h_miss;
            for (std::size_t t = 0; t + 1 < present.size(); ++t) {
                gl += g_[present[t].second];
                hl += h_[present[t].second];
                if (present[t].first == present[t + 1].first) continue;
                const double gr = g_present - gl;
                const double hr = h_present - hl;
                // try the missing block on each side, keep the better
                const double gain_left = xgb_split_gain(gl + g_miss, hl + h_miss, gr, hr,
                                                        params_.lambda, params_.gamma);
                const double gain_right = xgb_split_gain(gl, hl, gr + g_miss, hr + h_miss,
                                                         params_.lambda, params_.gamma);
                const bool to_left = gain_left >= gain_right;
                const double gain = to_left ? gain_left : gain_right;
                if (gain > best.gain) {
                    best.gain = gain;
                    best.channel = static_cast<int>(channel);
                    best.threshold =
                        present[t].first + 0.5 * (present[t + 1].first - present[t].first);
                    best.default_left = to_left;
                }
            }
        }
        return best;
    }

    const Matrix& x_;
    std::span<const double> g_;
    std::span<const double> h_;
    const XgbParams& params_;
};

} // namespace

BoostedEnsemble xgb_fit(const Matrix& features, std::span<const int> labels, XgbParams params) {
    if (features.rows() == 0) throw DataError("xgb_fit requires training data");
    if (params.rounds < 1) throw DataError("rounds must be >= 1");
    const std::size_t n = features.rows();

    BoostedEnsemble ensemble;
    ensemble.variant = BoostVariant::xgb;
    ensemble.learning_rate = params.learning_rate;

    Matrix scores(n, 3);
    std::vector<double> g_col(n), h_col(n);
    for (int round = 0; round < params.rounds; ++round) {
        const SoftmaxStats stats = softmax_grad_hess(scores, labels);
        std::array<RegressionTree, 3> group;
        for (std::size_t c = 0; c < 3; ++c) {
            for (std::size_t i = 0; i < n; ++i) {
                g_col[i] = stats.g(i, c);
                h_col[i] = stats.h(i, c);
            }
            XgbTreeBuilder builder(features, g_col, h_col, params);
            group[c] = builder.build();
            for (std::size_t i = 0; i < n; ++i) {
                scores(i, c) += params.learning_rate * group[c].value_at(features.row(i), true);
            }
        }
        ensemble.tree_groups.push_back(std::move(group));
        ensemble.train_loss.push_back(softmax_grad_hess(scores, labels).loss);
    }
    return ensemble;
}

} // namespace motordiag
