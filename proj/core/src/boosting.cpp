#include "motordiag/boosting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "motordiag/archive.hpp"

namespace motordiag {

SoftmaxStats softmax_grad_hess(const Matrix& scores, std::span<const int> labels) {
    const std::size_t n = scores.rows();
    if (n != labels.size()) throw DataError("scores/labels count mismatch");
    SoftmaxStats stats;
    stats.g = Matrix(n, 3);
    stats.h = Matrix(n, 3);
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = scores.row(i);
        double hi = row[0];
        for (double s : row) hi = std::max(hi, s);
        double sum = 0.0;
        std::array<double, 3> p{};
        for (std::size_t c = 0; c < 3; ++c) {
            p[c] = std::exp(row[c] - hi);
            sum += p[c];
        }
        const auto y = static_cast<std::size_t>(labels[i]);
        for (std::size_t c = 0; c < 3; ++c) {
            p[c] /= sum;
            stats.g(i, c) = p[c] - (c == y ? 1.0 : 0.0);
            stats.h(i, c) = p[c] * (1.0 - p[c]);
        }
        loss -= std::log(std::max(p[y], 1e-300));
    }
    stats.loss = loss / static_cast<double>(n);
    return stats;
}

double xgb_leaf_weight(double g_sum, double h_sum, double lambda) {
    return -g_sum / (h_sum + lambda);
}

double xgb_split_gain(double gl, double hl, double gr, double hr, double lambda, double gamma) {
    const double parent = (gl + gr) * (gl + gr) / (hl + hr + lambda);
    return 0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - parent) - gamma;
}

std::vector<double> BinMapper::fit_column(std::vector<double> values, std::size_t max_bins) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();

    std::vector<std::pair<double, std::size_t>> distinct; // value, count
    for (double v : values) {
        if (distinct.empty() || v != distinct.back().first) {
            distinct.emplace_back(v, 1);
        } else {
            ++distinct.back().second;
        }
    }

    std::vector<double> bounds;
    if (distinct.size() <= max_bins) {
        for (std::size_t i = 0; i + 1 < distinct.size(); ++i) {
            bounds.push_back(distinct[i].first +
                             0.5 * (distinct[i + 1].first - distinct[i].first));
        }
    } else {
        const double mean_size = static_cast<double>(n) / static_cast<double>(max_bins);
        std::size_t cum = 0;
        for (std::size_t i = 0; i + 1 < distinct.size(); ++i) {
            cum += distinct[i].second;
            if (static_cast<double>(cum) >=
                    mean_size * static_cast<double>(bounds.size() + 1) &&
                bounds.size() + 1 < max_bins) {
                bounds.push_back(distinct[i].first +
                                 0.5 * (distinct[i + 1].first - distinct[i].first));
            }
        }
    }
    bounds.push_back(std::numeric_limits<double>::infinity());
    return bounds;
}

BinMapper BinMapper::fit(const Matrix& features, std::size_t max_bins) {
    BinMapper mapper;
    mapper.upper_bounds.resize(features.cols());
    std::vector<double> column(features.rows());
    for (std::size_t j = 0; j < features.cols(); ++j) {
        for (std::size_t i = 0; i < features.rows(); ++i) column[i] = features(i, j);
        mapper.upper_bounds[j] = fit_column(column, max_bins);
    }
    return mapper;
}

std::size_t BinMapper::bin(std::size_t channel, double value) const {
    const auto& ub = upper_bounds[channel];
    return static_cast<std::size_t>(std::lower_bound(ub.begin(), ub.end(), value) - ub.begin());
}

double RegressionTree::value_at(std::span<const double> x, bool respect_missing) const {
    const RegressionTreeNode* node = &nodes[0];
    while (!node->is_leaf()) {
        const auto ch = static_cast<std::size_t>(node->channel);
        bool go_left;
        if (respect_missing && ch >= feat::kCr && ch < feat::kCr + 3 &&
            x[feat::kOpen + (ch - feat::kCr)] == 1.0) {
            go_left = node->default_left;
        } else {
            go_left = x[ch] <= node->threshold;
        }
        node = &nodes[static_cast<std::size_t>(go_left ? node->left : node->right)];
    }
    return node->weight;
}

double OrderedTargetStats::statistic(int category, int class_index) const {
    double count = 0.0, class_count = 0.0;
    if (auto it = seen_.find(category); it != seen_.end()) {
        count = static_cast<double>(it->second.first);
        class_count = static_cast<double>(it->second.second[static_cast<std::size_t>(class_index)]);
    }
    return (class_count + prior_weight_ * prior_value_) / (count + prior_weight_);
}

void OrderedTargetStats::observe(int category, int class_index) {
    auto& entry = seen_[category];
    ++entry.first;
    ++entry.second[static_cast<std::size_t>(class_index)];
}

namespace {

std::array<double, 3> cat_expand_sound(const BoostedEnsemble& ensemble, double sound_value) {
    const std::size_t category = sound_value > 0.5 ? 1 : 0;
    return ensemble.sound_target_stats[category];
}

std::size_t oblivious_leaf_index(const ObliviousTree& tree, std::span<const double> raw,
                                 const std::array<double, 3>& sound_ts) {
    std::size_t index = 0;
    for (std::size_t level = 0; level < tree.levels.size(); ++level) {
        const auto& cond = tree.levels[level];
        const auto ch = static_cast<std::size_t>(cond.channel);
        const double v = ch < 10 ? raw[ch] : sound_ts[ch - 10];
        if (v > cond.threshold) index |= (std::size_t{1} << level);
    }
    return index;
}

} // namespace

std::array<double, 3> boosted_scores(const BoostedEnsemble& ensemble, std::span<const double> x) {
    std::array<double, 3> scores = ensemble.base_score;
    switch (ensemble.variant) {
        case BoostVariant::xgb:
        case BoostVariant::lgbm: {
            const bool missing = ensemble.variant == BoostVariant::xgb;
            for (const auto& group : ensemble.tree_groups) {
                for (std::size_t c = 0; c < 3; ++c) {
                    scores[c] += ensemble.learning_rate * group[c].value_at(x, missing);
                }
            }
            break;
        }
        case BoostVariant::cat: {
            const auto sound_ts = cat_expand_sound(ensemble, x[feat::kSound]);
            for (const ObliviousTree& tree : ensemble.oblivious_trees) {
                const auto leaf = tree.leaves[oblivious_leaf_index(tree, x, sound_ts)];
                for (std::size_t c = 0; c < 3; ++c) {
                    scores[c] += ensemble.learning_rate * leaf[c];
                }
            }
            break;
        }
    }
    return scores;
}

Probabilities boosted_predict_proba(const BoostedEnsemble& ensemble, std::span<const double> x) {
    const auto scores = boosted_scores(ensemble, x);
    double hi = scores[0];
    for (double s : scores) hi = std::max(hi, s);
    Probabilities proba{};
    double sum = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
        proba[c] = std::exp(scores[c] - hi);
        sum += proba[c];
    }
    for (double& p : proba) p /= sum;
    return proba;
}

namespace {

void save_reg_tree(BinaryWriter& out, const RegressionTree& tree) {
    out.u64(tree.nodes.size());
    for (const RegressionTreeNode& node : tree.nodes) {
        out.i64(node.channel);
        out.f64(node.threshold);
        out.u8(node.default_left ? 1 : 0);
        out.i64(node.left);
        out.i64(node.right);
        out.f64(node.weight);
        out.i64(node.n_samples);
        out.f64(node.split_gain);
    }
}

RegressionTree load_reg_tree(BinaryReader& in) {
    RegressionTree tree;
    tree.nodes.resize(in.u64());
    for (RegressionTreeNode& node : tree.nodes) {
        node.channel = static_cast<int>(in.i64());
        node.threshold = in.f64();
        node.default_left = in.u8() != 0;
        node.left = static_cast<int>(in.i64());
        node.right = static_cast<int>(in.i64());
        node.weight = in.f64();
        node.n_samples = in.i64();
        node.split_gain = in.f64();
    }
    return tree;
}

} // namespace

void save_ensemble(BinaryWriter& out, const BoostedEnsemble& ensemble) {
    out.u8(static_cast<std::uint8_t>(ensemble.variant));
    for (double b : ensemble.base_score) out.f64(b);
    out.f64(ensemble.learning_rate);
    out.u64(ensemble.tree_groups.size());
    for (const auto& group : ensemble.tree_groups) {
        for (const RegressionTree& tree : group) save_reg_tree(out, tree);
    }
    out.u64(ensemble.oblivious_trees.size());
    for (const ObliviousTree& tree : ensemble.oblivious_trees) {
        out.u64(tree.levels.size());
        for (const ObliviousLevel& level : tree.levels) {
            out.i64(level.channel);
            out.f64(level.threshold);
        }
        out.u64(tree.leaves.size());
        for (const auto& leaf : tree.leaves) {
            for (double v : leaf) out.f64(v);
        }
    }
    for (const auto& category : ensemble.sound_target_stats) {
        for (double v : category) out.f64(v);
    }
    out.f64_vec(ensemble.train_loss);
}

BoostedEnsemble load_ensemble(BinaryReader& in) {
    BoostedEnsemble ensemble;
    ensemble.variant = static_cast<BoostVariant>(in.u8());
    for (double& b : ensemble.base_score) b = in.f64();
    ensemble.learning_rate = in.f64();
    ensemble.tree_groups.resize(in.u64());
    for (auto& group : ensemble.tree_groups) {
        for (RegressionTree& tree : group) tree = load_reg_tree(in);
    }
    ensemble.oblivious_trees.resize(in.u64());
    for (ObliviousTree& tree : ensemble.oblivious_trees) {
        tree.levels.resize(in.u64());
        for (ObliviousLevel& level : tree.levels) {
            level.channel = static_cast<int>(in.i64());
            level.threshold = in.f64();
        }
        tree.leaves.resize(in.u64());
        for (auto& leaf : tree.leaves) {
            for (double& v : leaf) v = in.f64();
        }
    }
    for (auto& category : ensemble.sound_target_stats) {
        for (double& v : category) v = in.f64();
    }
    ensemble.train_loss = in.f64_vec();
    return ensemble;
}

template <typename Params>
std::string BoostedClassifier<Params>::model_kind() const {
    if constexpr (std::is_same_v<Params, XgbParams>) return "boost-xgb";
    else if constexpr (std::is_same_v<Params, LgbmParams>) return "boost-lgbm";
    else return "boost-cat";
}

template <typename Params>
void BoostedClassifier<Params>::save(BinaryWriter& out) const {
    save_ensemble(out, model_);
}

template <typename Params>
void BoostedClassifier<Params>::load(BinaryReader& in) {
    model_ = load_ensemble(in);
}

template class BoostedClassifier<XgbParams>;
template class BoostedClassifier<LgbmParams>;
template class BoostedClassifier<CatParams>;

} // namespace motordiag
