#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "motordiag/archive.hpp"
#include "motordiag/boosting.hpp"
#include "motordiag/rng.hpp"
#include "motordiag/synth.hpp"

#include "oracles.hpp"

using namespace motordiag;

namespace {

Dataset fixture(std::size_t n, std::uint64_t seed) {
    GeneratorConfig cfg;
    cfg.n = n;
    cfg.seed = seed;
    return generate(cfg);
}

std::string ensemble_bytes(const BoostedEnsemble& ensemble) {
    BinaryWriter out;
    save_ensemble(out, ensemble);
    return out.bytes();
}

void check_non_increasing(const std::vector<double>& losses) {
    REQUIRE(!losses.empty());
    for (std::size_t t = 0; t + 1 < losses.size(); ++t) {
        CHECK(losses[t + 1] <= losses[t] + 1e-12);
    }
}

} // namespace

TEST_CASE("softmax objective at equal scores") {
    Matrix scores(3, 3); // all zero
    const std::vector<int> y = {0, 1, 2};
    const SoftmaxStats stats = softmax_grad_hess(scores, y);
    CHECK(stats.loss == doctest::Approx(std::log(3.0)).epsilon(1e-12));
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t c = 0; c < 3; ++c) {
            const double expected = 1.0 / 3.0 - (c == static_cast<std::size_t>(y[i]) ? 1.0 : 0.0);
            CHECK(stats.g(i, c) == doctest::Approx(expected).epsilon(1e-12));
            CHECK(stats.h(i, c) == doctest::Approx(2.0 / 9.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("confident true-class scores push the gradient to zero") {
    Matrix scores(1, 3);
    scores(0, 0) = 40.0;
    const std::vector<int> y = {0};
    const SoftmaxStats stats = softmax_grad_hess(scores, y);
    CHECK(std::abs(stats.g(0, 0)) < 1e-12);
    CHECK(stats.loss < 1e-12);
}

TEST_CASE("softmax gradient matches central finite differences") {
    Rng rng(31);
    for (int trial = 0; trial < 5; ++trial) {
        const std::size_t n = 7;
        Matrix scores(n, 3);
        for (double& v : scores.data()) v = rng.uniform(-2, 2);
        std::vector<int> y(n);
        for (auto& v : y) v = static_cast<int>(rng.below(3));

        const SoftmaxStats stats = softmax_grad_hess(scores, y);
        const double step = 1e-5;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t c = 0; c < 3; ++c) {
                Matrix probe = scores;
                probe(i, c) = scores(i, c) + step;
                const double up = softmax_grad_hess(probe, y).loss;
                probe(i, c) = scores(i, c) - step;
                const double down = softmax_grad_hess(probe, y).loss;
                // dloss/dscore = g / n
                const double fd = (up - down) / (2.0 * step) * static_cast<double>(n);
                CHECK(std::abs(stats.g(i, c) - fd) <=
                      1e-5 * std::max(1.0, std::abs(stats.g(i, c))));
            }
        }
    }
}

TEST_CASE("gradient rows sum to zero and hessians stay in range") {
    Rng rng(32);
    Matrix scores(50, 3);
    for (double& v : scores.data()) v = rng.uniform(-4, 4);
    std::vector<int> y(50);
    for (auto& v : y) v = static_cast<int>(rng.below(3));
    const SoftmaxStats stats = softmax_grad_hess(scores, y);
    for (std::size_t i = 0; i < 50; ++i) {
        CHECK(std::abs(stats.g(i, 0) + stats.g(i, 1) + stats.g(i, 2)) <= 1e-12);
        for (std::size_t c = 0; c < 3; ++c) {
            CHECK(stats.h(i, c) > 0.0);
            CHECK(stats.h(i, c) <= 0.25);
        }
    }
}

TEST_CASE("leaf weight and split gain formulas") {
    CHECK(xgb_leaf_weight(3.0, 2.0, 1.0) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(xgb_leaf_weight(0.0, 5.0, 1.0) == 0.0);
    // splitting identical halves buys nothing (unregularized)
    CHECK(std::abs(xgb_split_gain(2.0, 3.0, 2.0, 3.0, 0.0, 0.0)) < 1e-12);
    // splitting off a clean negative-gradient group has positive gain
    CHECK(xgb_split_gain(-4.0, 2.0, 4.0, 2.0, 1.0, 0.0) > 0.0);
    // gamma is a flat penalty
    CHECK(xgb_split_gain(-4.0, 2.0, 4.0, 2.0, 1.0, 0.5) ==
          doctest::Approx(xgb_split_gain(-4.0, 2.0, 4.0, 2.0, 1.0, 0.0) - 0.5).epsilon(1e-12));
}

TEST_CASE("a one-round unit-rate stump fits a separable channel") {
    Matrix x(8, feat::kCount);
    std::vector<int> y(8);
    for (std::size_t i = 0; i < 8; ++i) {
        x(i, feat::kTep) = i < 4 ? 40.0 : 100.0;
        y[i] = i < 4 ? 0 : 2;
    }
    XgbParams params;
    params.rounds = 1;
    params.learning_rate = 1.0;
    params.max_depth = 1;
    const BoostedEnsemble ensemble = xgb_fit(x, y, params);
    REQUIRE(ensemble.tree_groups.size() == 1);
    for (std::size_t i = 0; i < 8; ++i) {
        const Probabilities p = boosted_predict_proba(ensemble, x.row(i));
        int arg = 0;
        for (int c = 1; c < 3; ++c) {
            if (p[static_cast<std::size_t>(c)] > p[static_cast<std::size_t>(arg)]) arg = c;
        }
        CHECK(arg == y[i]);
    }
}

TEST_CASE("xgb training loss is non-increasing and fitting is deterministic") {
    const Dataset d = fixture(300, 42);
    const Matrix x = encode(d);
    const std::vector<int> y = d.label_indices();
    XgbParams params;
    params.rounds = 25;
    const BoostedEnsemble a = xgb_fit(x, y, params);
    check_non_increasing(a.train_loss);
    const BoostedEnsemble b = xgb_fit(x, y, params);
    CHECK(ensemble_bytes(a) == ensemble_bytes(b));
}

TEST_CASE("xgb greedy split equals brute-force enumeration") {
    const auto [x, y] = oracles::split_oracle_fixture(50, 42);
    const SoftmaxStats stats = softmax_grad_hess(Matrix(x.rows(), 3), y);

    XgbParams params;
    params.rounds = 1;
    params.learning_rate = 1.0;
    params.max_depth = 1; // stumps expose exactly the root split
    const BoostedEnsemble ensemble = xgb_fit(x, y, params);

    std::vector<std::size_t> all(x.rows());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    for (std::size_t c = 0; c < 3; ++c) {
        std::vector<double> g(x.rows()), h(x.rows());
        for (std::size_t i = 0; i < x.rows(); ++i) {
            g[i] = stats.g(i, c);
            h[i] = stats.h(i, c);
        }
        const auto expected =
            oracles::xgb_best_split_brute(x, g, h, all, params.lambda, params.gamma);
        const RegressionTree& tree = ensemble.tree_groups[0][c];
        REQUIRE_FALSE(tree.nodes[0].is_leaf());
        CHECK(tree.nodes[0].channel == expected.channel);
        CHECK(tree.nodes[0].threshold == doctest::Approx(expected.threshold).epsilon(1e-12));
        CHECK(tree.nodes[0].default_left == expected.default_left);
        CHECK(tree.nodes[0].split_gain == doctest::Approx(expected.gain).epsilon(1e-9));
    }
}

TEST_CASE("open-circuit readings follow the stored default direction") {
    RegressionTree tree;
    RegressionTreeNode split;
    split.channel = static_cast<int>(feat::kCr); // CR1
    split.threshold = 1.0;
    split.default_left = false;
    split.left = 1;
    split.right = 2;
    tree.nodes.push_back(split);
    RegressionTreeNode left, right;
    left.weight = -5.0;
    right.weight = +5.0;
    tree.nodes.push_back(left);
    tree.nodes.push_back(right);

    FeatureVector x{};
    x[feat::kCr] = 0.0;  // value says left of the threshold
    x[feat::kOpen] = 1.0; // but the reading is an open circuit
    CHECK(tree.value_at(x, true) == 5.0);   // missing rule applies
    CHECK(tree.value_at(x, false) == -5.0); // plain threshold routing
}

TEST_CASE("lgbm never splits a nine-sample dataset") {
    Matrix x(9, feat::kCount);
    std::vector<int> y(9);
    Rng rng(33);
    for (std::size_t i = 0; i < 9; ++i) {
        for (std::size_t j = 0; j < feat::kCount; ++j) x(i, j) = rng.uniform(0, 10);
        y[i] = static_cast<int>(i % 3);
    }
    LgbmParams params;
    params.rounds = 3;
    const BoostedEnsemble ensemble = lgbm_fit(x, y, params);
    for (const auto& group : ensemble.tree_groups) {
        for (const RegressionTree& tree : group) {
            REQUIRE(tree.nodes.size() == 1);
            CHECK(tree.nodes[0].is_leaf());
        }
    }
}

TEST_CASE("lgbm rejects splits below the gain threshold") {
    const Dataset d = fixture(80, 7);
    const Matrix x = encode(d);
    const std::vector<int> y = d.label_indices();

    // measure the best achievable root gain with the threshold disabled
    LgbmParams params;
    params.rounds = 1;
    params.min_split_gain = 0.0;
    const BoostedEnsemble free_fit = lgbm_fit(x, y, params);
    double best_gain = 0.0;
    for (const auto& group : free_fit.tree_groups) {
        for (const RegressionTree& tree : group) {
            for (const RegressionTreeNode& node : tree.nodes) {
                if (!node.is_leaf()) best_gain = std::max(best_gain, node.split_gain);
            }
        }
    }
    REQUIRE(best_gain > 0.0);

    // a threshold just above the best gain suppresses every split
    params.min_split_gain = best_gain * 1.000001;
    const BoostedEnsemble blocked = lgbm_fit(x, y, params);
    for (const auto& group : blocked.tree_groups) {
        for (const RegressionTree& tree : group) {
            CHECK(tree.nodes.size() == 1);
        }
    }

    // every accepted split clears the configured threshold
    params.min_split_gain = 0.01;
    params.rounds = 5;
    const BoostedEnsemble normal = lgbm_fit(x, y, params);
    for (const auto& group : normal.tree_groups) {
        for (const RegressionTree& tree : group) {
            for (const RegressionTreeNode& node : tree.nodes) {
                if (!node.is_leaf()) CHECK(node.split_gain >= 0.01);
                if (node.is_leaf()) CHECK(node.n_samples >= 10);
            }
        }
    }
}

TEST_CASE("binned splits equal exact splits when channels have few distinct values") {
    // every channel takes at most 81 distinct values by construction
    const auto [x, y] = oracles::split_oracle_fixture(160, 12);
    const SoftmaxStats stats = softmax_grad_hess(Matrix(x.rows(), 3), y);

    LgbmParams params;
    params.rounds = 1;
    const BoostedEnsemble ensemble = lgbm_fit(x, y, params);

    for (std::size_t c = 0; c < 3; ++c) {
        std::vector<double> g(x.rows()), h(x.rows());
        for (std::size_t i = 0; i < x.rows(); ++i) {
            g[i] = stats.g(i, c);
            h[i] = stats.h(i, c);
        }
        const auto expected = oracles::lgbm_exact_leafwise(
            x, g, h, params.max_leaves, params.min_data_in_leaf, params.min_split_gain,
            params.lambda);

        // equality of split decisions: same channels and gains, and every
        // training sample lands on the same leaf weight
        const RegressionTree& tree = ensemble.tree_groups[0][c];
        std::vector<std::pair<int, double>> splits;
        for (const RegressionTreeNode& node : tree.nodes) {
            if (!node.is_leaf()) splits.emplace_back(node.channel, node.split_gain);
        }
        std::sort(splits.begin(), splits.end());
        REQUIRE(splits.size() == expected.splits.size());
        for (std::size_t s = 0; s < splits.size(); ++s) {
            CHECK(splits[s].first == expected.splits[s].first);
            CHECK(splits[s].second == doctest::Approx(expected.splits[s].second).epsilon(1e-9));
        }
        for (std::size_t i = 0; i < x.rows(); ++i) {
            CHECK(tree.value_at(x.row(i), false) ==
                  doctest::Approx(expected.sample_weight[i]).epsilon(1e-9));
        }
    }
}

TEST_CASE("lgbm training loss is non-increasing and deterministic") {
    const Dataset d = fixture(300, 42);
    const Matrix x = encode(d);
    const std::vector<int> y = d.label_indices();
    LgbmParams params;
    params.rounds = 25;
    const BoostedEnsemble a = lgbm_fit(x, y, params);
    check_non_increasing(a.train_loss);
    CHECK(ensemble_bytes(a) == ensemble_bytes(lgbm_fit(x, y, params)));
}

TEST_CASE("ordered target statistics") {
    OrderedTargetStats stats(1.0, 1.0 / 3.0);
    CHECK(stats.statistic(0, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-12)); // unseen

    stats.observe(0, 1);
    stats.observe(0, 2);
    // 2 prior occurrences, 1 matching the class
    CHECK(stats.statistic(0, 1) == doctest::Approx(4.0 / 9.0).epsilon(1e-12));

    // observations of other categories never change this category's statistic
    const double before = stats.statistic(0, 1);
    stats.observe(1, 1);
    stats.observe(1, 0);
    CHECK(stats.statistic(0, 1) == before);
}

TEST_CASE("ordered statistics never leak later labels") {
    Rng rng(34);
    const std::size_t n = 60;
    std::vector<int> categories(n), labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        categories[i] = static_cast<int>(rng.below(2));
        labels[i] = static_cast<int>(rng.below(3));
    }
    auto walk = [&](const std::vector<int>& label_seq, std::size_t upto) {
        OrderedTargetStats stats(1.0, 1.0 / 3.0);
        std::vector<double> out;
        for (std::size_t i = 0; i <= upto; ++i) {
            out.push_back(stats.statistic(categories[i], 0));
            stats.observe(categories[i], label_seq[i]);
        }
        return out;
    };
    const std::size_t cut = 30;
    std::vector<int> mutated = labels;
    for (std::size_t i = cut + 1; i < n; ++i) mutated[i] = (labels[i] + 1) % 3;
    CHECK(walk(labels, cut) == walk(mutated, cut));
}

TEST_CASE("cat ensembles hold the configured tree count and depth") {
    const Dataset d = fixture(200, 42);
    const Matrix x = encode(d);
    const std::vector<int> y = d.label_indices();
    CatParams params; // 70 rounds, depth 6
    const BoostedEnsemble ensemble = cat_fit(x, y, params);
    REQUIRE(ensemble.oblivious_trees.size() == 70);
    for (const ObliviousTree& tree : ensemble.oblivious_trees) {
        CHECK(tree.levels.size() == 6);
        CHECK(tree.leaves.size() == 64);
        std::set<std::pair<int, double>> conditions;
        for (const ObliviousLevel& level : tree.levels) {
            conditions.insert({level.channel, level.threshold});
        }
        CHECK(conditions.size() == 6); // level conditions are distinct
    }
    check_non_increasing(ensemble.train_loss);
    CHECK(ensemble_bytes(ensemble) == ensemble_bytes(cat_fit(x, y, params)));
}

TEST_CASE("boosted prediction basics") {
    BoostedEnsemble empty;
    empty.variant = BoostVariant::xgb;
    empty.learning_rate = 0.3;
    FeatureVector x{};
    const Probabilities uniform = boosted_predict_proba(empty, x);
    for (double p : uniform) CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    // one stump worth (+1, 0, 0) at a known learning rate
    BoostedEnsemble stump = empty;
    stump.learning_rate = 0.5;
    std::array<RegressionTree, 3> group;
    for (auto& tree : group) {
        RegressionTreeNode leaf;
        leaf.weight = 0.0;
        tree.nodes.push_back(leaf);
    }
    group[0].nodes[0].weight = 1.0;
    stump.tree_groups.push_back(group);
    const Probabilities p = boosted_predict_proba(stump, x);
    const double z = std::exp(0.5) + 2.0;
    CHECK(p[0] == doctest::Approx(std::exp(0.5) / z).epsilon(1e-12));
    CHECK(p[1] == doctest::Approx(1.0 / z).epsilon(1e-12));

    Rng rng(35);
    const Dataset d = fixture(120, 36);
    const Matrix xm = encode(d);
    const std::vector<int> y = d.label_indices();
    XgbParams params;
    params.rounds = 5;
    const BoostedEnsemble fitted = xgb_fit(xm, y, params);
    for (int probe = 0; probe < 30; ++probe) {
        FeatureVector v{};
        for (double& e : v) e = rng.uniform(0, 200);
        const Probabilities q = boosted_predict_proba(fitted, v);
        CHECK(std::abs(q[0] + q[1] + q[2] - 1.0) < 1e-9);
    }
}
