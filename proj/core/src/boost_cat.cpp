#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "motordiag/boosting.hpp"
#include "motordiag/rng.hpp"

namespace motordiag {

namespace {

constexpr std::size_t kExpandedChannels = 13; // 0..9 raw, 10..12 sound target stats

int sound_category(double sound_value) { return sound_value > 0.5 ? 1 : 0; }

/// Feature view for one permutation: raw channels plus that permutation's
/// ordered target statistics in place of the SOUND channel.
struct PermutationView {
    const Matrix* raw = nullptr;
    Matrix ts; // n x 3

    double value(std::size_t i, std::size_t channel) const {
        return channel < 10 ? (*raw)(i, channel) : ts(i, channel - 10);
    }
};

std::size_t route_leaf(const ObliviousTree& tree, const PermutationView& view, std::size_t i) {
    std::size_t index = 0;
    for (std::size_t level = 0; level < tree.levels.size(); ++level) {
        const auto& cond = tree.levels[level];
        if (view.value(i, static_cast<std::size_t>(cond.channel)) > cond.threshold) {
            index |= (std::size_t{1} << level);
        }
    }
    return index;
}

} // namespace

BoostedEnsemble cat_fit(const Matrix& features, std::span<const int> labels, CatParams params) {
    if (features.rows() == 0) throw DataError("cat_fit requires training data");
    if (params.rounds < 1) throw DataError("rounds must be >= 1");
    if (params.n_permutations < 1) throw DataError("need at least one permutation");
    const std::size_t n = features.rows();
    const auto n_perm = static_cast<std::size_t>(params.n_permutations);
    const double lambda = params.lambda;

    BoostedEnsemble ensemble;
    ensemble.variant = BoostVariant::cat;
    ensemble.learning_rate = params.learning_rate;

    // Ordered target statistics per permutation; full-data statistics are
    // retained on the model for prediction.
    std::vector<std::vector<std::size_t>> perms(n_perm);
    std::vector<PermutationView> views(n_perm);
    for (std::size_t r = 0; r < n_perm; ++r) {
        perms[r].resize(n);
        std::iota(perms[r].begin(), perms[r].end(), std::size_t{0});
        Rng rng(mix_seed(params.seed, 101 + r));
        shuffle(perms[r], rng);

        views[r].raw = &features;
        views[r].ts = Matrix(n, 3);
        OrderedTargetStats stats(params.prior_weight, params.prior_value);
        for (std::size_t i : perms[r]) {
            const int category = sound_category(features(i, feat::kSound));
            for (int c = 0; c < kNumClasses; ++c) {
                views[r].ts(i, static_cast<std::size_t>(c)) = stats.statistic(category, c);
            }
            stats.observe(category, labels[i]);
        }
    }
    {
        OrderedTargetStats full(params.prior_weight, params.prior_value);
        for (std::size_t i = 0; i < n; ++i) {
            full.observe(sound_category(features(i, feat::kSound)), labels[i]);
        }
        for (int category = 0; category < 2; ++category) {
            for (int c = 0; c < kNumClasses; ++c) {
                ensemble.sound_target_stats[static_cast<std::size_t>(category)]
                                           [static_cast<std::size_t>(c)] =
                    full.statistic(category, c);
            }
        }
    }
    PermutationView final_view;
    final_view.raw = &features;
    final_view.ts = Matrix(n, 3);
    for (std::size_t i = 0; i < n; ++i) {
        const int category = sound_category(features(i, feat::kSound));
        for (std::size_t c = 0; c < 3; ++c) {
            final_view.ts(i, c) = ensemble.sound_target_stats[static_cast<std::size_t>(category)][c];
        }
    }

    // Quantile borders per permutation over the expanded channels.
    std::vector<BinMapper> mappers(n_perm);
    std::vector<std::vector<std::vector<std::uint16_t>>> binned(n_perm);
    std::vector<double> column(n);
    for (std::size_t r = 0; r < n_perm; ++r) {
        mappers[r].upper_bounds.resize(kExpandedChannels);
        binned[r].resize(kExpandedChannels);
        for (std::size_t ch = 0; ch < kExpandedChannels; ++ch) {
            for (std::size_t i = 0; i < n; ++i) column[i] = views[r].value(i, ch);
            mappers[r].upper_bounds[ch] = BinMapper::fit_column(column, params.max_bins);
            binned[r][ch].resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                binned[r][ch][i] = static_cast<std::uint16_t>(mappers[r].bin(ch, views[r].value(i, ch)));
            }
        }
    }

    std::vector<Matrix> scores(n_perm, Matrix(n, 3)); // per-permutation model state
    Matrix final_scores(n, 3);

    const auto depth = static_cast<std::size_t>(params.depth);
    std::vector<std::size_t> leaf_of(n);
    for (int round = 0; round < params.rounds; ++round) {
        const std::size_t r = static_cast<std::size_t>(round) % n_perm;
        const SoftmaxStats active = softmax_grad_hess(scores[r], labels);

        // Greedy level-shared structure on the active permutation's features.
        ObliviousTree tree;
        std::set<std::pair<int, std::size_t>> used;
        std::fill(leaf_of.begin(), leaf_of.end(), std::size_t{0});
        for (std::size_t level = 0; level < depth; ++level) {
            const std::size_t leaves_now = std::size_t{1} << level;

            // per-leaf class totals under the current partition
            std::vector<double> leaf_g(leaves_now * 3, 0.0), leaf_h(leaves_now * 3, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t c = 0; c < 3; ++c) {
                    leaf_g[leaf_of[i] * 3 + c] += active.g(i, c);
                    leaf_h[leaf_of[i] * 3 + c] += active.h(i, c);
                }
            }

            int best_channel = -1;
            std::size_t best_bin = 0;
            double best_gain = -std::numeric_limits<double>::infinity();
            std::vector<double> hist_g, hist_h, run_g, run_h;
            for (std::size_t ch = 0; ch < kExpandedChannels; ++ch) {
                const std::size_t nbins = mappers[r].bins(ch);
                if (nbins < 2) continue;
                hist_g.assign(leaves_now * nbins * 3, 0.0);
                hist_h.assign(leaves_now * nbins * 3, 0.0);
                const auto& bins_col = binned[r][ch];
                for (std::size_t i = 0; i < n; ++i) {
                    const std::size_t cell = (leaf_of[i] * nbins + bins_col[i]) * 3;
                    for (std::size_t c = 0; c < 3; ++c) {
                        hist_g[cell + c] += active.g(i, c);
                        hist_h[cell + c] += active.h(i, c);
                    }
                }
                run_g.assign(leaves_now * 3, 0.0);
                run_h.assign(leaves_now * 3, 0.0);
                for (std::size_t b = 0; b + 1 < nbins; ++b) {
                    double gain = 0.0;
                    for (std::size_t leaf = 0; leaf < leaves_now; ++leaf) {
                        for (std::size_t c = 0; c < 3; ++c) {
                            const std::size_t k = leaf * 3 + c;
                            run_g[k] += hist_g[(leaf * nbins + b) * 3 + c];
                            run_h[k] += hist_h[(leaf * nbins + b) * 3 + c];
                            gain += xgb_split_gain(run_g[k], run_h[k], leaf_g[k] - run_g[k],
                                                   leaf_h[k] - run_h[k], lambda, 0.0);
                        }
                    }
                    if (used.contains({static_cast<int>(ch), b})) continue;
                    if (gain > best_gain) {
                        best_gain = gain;
                        best_channel = static_cast<int>(ch);
                        best_bin = b;
                    }
                }
            }
            if (best_channel < 0) break; // no unused condition left (degenerate data)
            used.insert({best_channel, best_bin});
            tree.levels.push_back(
                {best_channel,
                 mappers[r].upper_bounds[static_cast<std::size_t>(best_channel)][best_bin]});
            const auto& bins_col = binned[r][static_cast<std::size_t>(best_channel)];
            for (std::size_t i = 0; i < n; ++i) {
                if (bins_col[i] > best_bin) leaf_of[i] |= (std::size_t{1} << level);
            }
        }
        const std::size_t n_leaves = std::size_t{1} << tree.levels.size();

        // Leaf values: average of the permutation models' Newton estimates.
        tree.leaves.assign(n_leaves, {0.0, 0.0, 0.0});
        std::vector<std::vector<std::size_t>> perm_leaf(n_perm, std::vector<std::size_t>(n));
        for (std::size_t rp = 0; rp < n_perm; ++rp) {
            const SoftmaxStats stats =
                rp == r ? active : softmax_grad_hess(scores[rp], labels);
            for (std::size_t i = 0; i < n; ++i) perm_leaf[rp][i] = route_leaf(tree, views[rp], i);

            std::vector<double> g_sum(n_leaves * 3, 0.0), h_sum(n_leaves * 3, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t c = 0; c < 3; ++c) {
                    g_sum[perm_leaf[rp][i] * 3 + c] += stats.g(i, c);
                    h_sum[perm_leaf[rp][i] * 3 + c] += stats.h(i, c);
                }
            }
            for (std::size_t leaf = 0; leaf < n_leaves; ++leaf) {
                for (std::size_t c = 0; c < 3; ++c) {
                    tree.leaves[leaf][c] += xgb_leaf_weight(g_sum[leaf * 3 + c],
                                                            h_sum[leaf * 3 + c], lambda) /
                                            static_cast<double>(n_perm);
                }
            }

            // Ordered update: each sample receives a leaf value computed only
            // from samples preceding it in this permutation.
            std::vector<double> run_g(n_leaves * 3, 0.0), run_h(n_leaves * 3, 0.0);
            for (std::size_t i : perms[rp]) {
                const std::size_t leaf = perm_leaf[rp][i];
                for (std::size_t c = 0; c < 3; ++c) {
                    const std::size_t k = leaf * 3 + c;
                    scores[rp](i, c) += params.learning_rate *
                                        xgb_leaf_weight(run_g[k], run_h[k], lambda);
                    run_g[k] += stats.g(i, c);
                    run_h[k] += stats.h(i, c);
                }
            }
        }

        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t leaf = route_leaf(tree, final_view, i);
            for (std::size_t c = 0; c < 3; ++c) {
                final_scores(i, c) += params.learning_rate * tree.leaves[leaf][c];
            }
        }
        ensemble.oblivious_trees.push_back(std::move(tree));
        ensemble.train_loss.push_back(softmax_grad_hess(final_scores, labels).loss);
    }
    return ensemble;
}

} // namespace motordiag
