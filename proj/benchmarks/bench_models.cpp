#include <benchmark/benchmark.h>

#include "motordiag/boosting.hpp"
#include "motordiag/forest.hpp"
#include "motordiag/knn.hpp"
#include "motordiag/metrics.hpp"
#include "motordiag/svm.hpp"
#include "motordiag/synth.hpp"

using namespace motordiag;

namespace {

struct Fixture {
    Matrix x;
    Matrix scaled;
    std::vector<int> y;
};

const Fixture& fixture(std::size_t n) {
    static std::map<std::size_t, Fixture> cache;
    auto it = cache.find(n);
    if (it == cache.end()) {
        GeneratorConfig cfg;
        cfg.n = n;
        cfg.seed = 42;
        const Dataset d = generate(cfg);
        Fixture fx;
        fx.x = encode(d);
        fx.scaled = apply_scaler(fit_scaler(fx.x), fx.x);
        fx.y = d.label_indices();
        it = cache.emplace(n, std::move(fx)).first;
    }
    return it->second;
}

} // namespace

static void BM_KernelEvalRbf(benchmark::State& state) {
    const Fixture& fx = fixture(256);
    KernelSpec spec{.kind = KernelKind::rbf, .gamma = 0.1};
    std::size_t i = 0;
    for (auto _ : state) {
        const double k = kernel_eval(spec, fx.scaled.row(i % 256), fx.scaled.row((i + 7) % 256));
        benchmark::DoNotOptimize(k);
        ++i;
    }
}
BENCHMARK(BM_KernelEvalRbf);

static void BM_SmoFitBinary(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const Fixture& fx = fixture(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = fx.y[i] == 0 ? 1 : -1;
    KernelSpec spec{.kind = KernelKind::rbf, .gamma = 0.1, .c = 0.75, .max_iter = 1000};
    for (auto _ : state) {
        benchmark::DoNotOptimize(smo_fit_binary(fx.scaled, y, spec));
    }
}
BENCHMARK(BM_SmoFitBinary)->Arg(128)->Arg(512);

static void BM_TreeFit(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const Fixture& fx = fixture(n);
    for (auto _ : state) {
        Rng rng(42);
        benchmark::DoNotOptimize(
            tree_fit(fx.x, fx.y, {.max_depth = -1, .min_samples_leaf = 1, .m_try = 4}, rng));
    }
}
BENCHMARK(BM_TreeFit)->Arg(512)->Arg(1050);

static void BM_KnnPredict(benchmark::State& state) {
    const Fixture& fx = fixture(1050);
    const KnnModel model = knn_fit(fx.scaled, fx.y, 5);
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(knn_predict_proba(model, fx.scaled.row(i % 1050)));
        ++i;
    }
}
BENCHMARK(BM_KnnPredict);

static void BM_XgbRound(benchmark::State& state) {
    const Fixture& fx = fixture(840);
    XgbParams params;
    params.rounds = 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(xgb_fit(fx.x, fx.y, params));
    }
}
BENCHMARK(BM_XgbRound);

static void BM_LgbmRound(benchmark::State& state) {
    const Fixture& fx = fixture(840);
    LgbmParams params;
    params.rounds = 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(lgbm_fit(fx.x, fx.y, params));
    }
}
BENCHMARK(BM_LgbmRound);

static void BM_CatRound(benchmark::State& state) {
    const Fixture& fx = fixture(840);
    CatParams params;
    params.rounds = 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(cat_fit(fx.x, fx.y, params));
    }
}
BENCHMARK(BM_CatRound);

static void BM_EvaluateMetrics(benchmark::State& state) {
    ConfusionMatrix cm(3);
    cm.at(0, 0) = 76;
    cm.at(1, 1) = 72;
    cm.at(2, 2) = 47;
    cm.at(2, 0) = 15;
    for (auto _ : state) {
        benchmark::DoNotOptimize(evaluate(cm));
    }
}
BENCHMARK(BM_EvaluateMetrics);

BENCHMARK_MAIN();
