#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "motordiag/rng.hpp"
#include "motordiag/svm.hpp"
#include "motordiag/synth.hpp"

#include "oracles.hpp"

using namespace motordiag;

namespace {

/// Three well-separated 2-D blobs, `per_class` points each.
void make_blobs(std::size_t per_class, std::uint64_t seed, Matrix& x, std::vector<int>& y) {
    Rng rng(seed);
    const std::array<std::pair<double, double>, 3> centers = {{{0, 0}, {10, 0}, {0, 10}}};
    x = Matrix(3 * per_class, 2);
    y.assign(3 * per_class, 0);
    for (std::size_t c = 0; c < 3; ++c) {
        for (std::size_t i = 0; i < per_class; ++i) {
            const std::size_t row = c * per_class + i;
            x(row, 0) = centers[c].first + rng.normal(0, 0.5);
            x(row, 1) = centers[c].second + rng.normal(0, 0.5);
            y[row] = static_cast<int>(c);
        }
    }
}

void check_dual_feasibility(const BinarySvmModel& model, double c) {
    double balance = 0.0;
    for (std::size_t i = 0; i < model.alpha.size(); ++i) {
        CHECK(model.alpha[i] >= 0.0);
        CHECK(model.alpha[i] <= c);
        balance += model.alpha[i] * static_cast<double>(model.train_y[i]);
    }
    CHECK(std::abs(balance) <= 1e-6);
}

} // namespace

TEST_CASE("kernel evaluations") {
    const std::vector<double> a = {1, 2}, b = {3, 4};
    KernelSpec linear{.kind = KernelKind::linear};
    CHECK(kernel_eval(linear, a, b) == 11.0);

    KernelSpec rbf{.kind = KernelKind::rbf, .gamma = 0.7};
    CHECK(kernel_eval(rbf, a, a) == 1.0);

    KernelSpec sigmoid{.kind = KernelKind::sigmoid, .gamma = 0.001, .coef0 = 0.0};
    const std::vector<double> ortho1 = {1, 0}, ortho2 = {0, 1};
    CHECK(kernel_eval(sigmoid, ortho1, ortho2) == 0.0);

    KernelSpec poly{.kind = KernelKind::polynomial, .degree = 5, .gamma = 1.0, .coef0 = 0.75};
    const std::vector<double> px = {0.5, 0}, pz = {0.5, 0}; // dot = 0.25
    CHECK(kernel_eval(poly, px, pz) == doctest::Approx(1.0).epsilon(1e-12));

    const std::vector<double> three = {1, 2, 3};
    CHECK_THROWS_AS(kernel_eval(linear, a, three), DataError);
}

TEST_CASE("kernels are symmetric") {
    Rng rng(1);
    for (KernelKind kind : {KernelKind::linear, KernelKind::polynomial, KernelKind::sigmoid,
                            KernelKind::rbf}) {
        KernelSpec spec{.kind = kind, .degree = 3, .gamma = 0.3, .coef0 = 0.5};
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<double> x(5), z(5);
            for (double& v : x) v = rng.uniform(-2, 2);
            for (double& v : z) v = rng.uniform(-2, 2);
            CHECK(kernel_eval(spec, x, z) == kernel_eval(spec, z, x));
        }
    }
}

TEST_CASE("smo recovers the two-point analytic solution") {
    Matrix x(2, 1);
    x(0, 0) = -1.0;
    x(1, 0) = 1.0;
    const std::vector<int> y = {-1, 1};
    KernelSpec spec{.kind = KernelKind::linear, .c = 1000.0, .max_iter = 1000};
    const BinarySvmModel model = smo_fit_binary(x, y, spec);

    REQUIRE(model.alpha.size() == 2);
    CHECK(std::abs(model.alpha[0] - 0.5) < 1e-6);
    CHECK(std::abs(model.alpha[1] - 0.5) < 1e-6);
    CHECK(std::abs(model.bias) < 1e-6);
    for (double probe : {-2.0, -0.5, 0.25, 3.0}) {
        const std::vector<double> q = {probe};
        CHECK(svm_decision(model, q) == doctest::Approx(probe).epsilon(1e-6));
    }
}

TEST_CASE("free support vectors satisfy the KKT margin contract") {
    Matrix x;
    std::vector<int> labels;
    make_blobs(25, 3, x, labels);
    std::vector<int> y(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) y[i] = labels[i] == 0 ? 1 : -1;

    KernelSpec spec{.kind = KernelKind::rbf, .gamma = 0.1, .c = 1.0, .max_iter = 5000};
    const BinarySvmModel model = smo_fit_binary(x, y, spec);
    check_dual_feasibility(model, spec.c);
    for (std::size_t i = 0; i < model.alpha.size(); ++i) {
        if (model.alpha[i] > 1e-8 && model.alpha[i] < spec.c - 1e-8) {
            const double f = svm_decision(model, x.row(i));
            CHECK(std::abs(static_cast<double>(y[i]) * f - 1.0) < 1e-2);
        }
    }
}

TEST_CASE("identical points with opposite labels clip to the box") {
    Matrix x(2, 2);
    x(0, 0) = x(1, 0) = 1.0;
    x(0, 1) = x(1, 1) = 2.0;
    const std::vector<int> y = {1, -1};
    KernelSpec spec{.kind = KernelKind::linear, .c = 0.75, .max_iter = 100};
    const BinarySvmModel model = smo_fit_binary(x, y, spec);
    CHECK(model.alpha[0] == 0.75);
    CHECK(model.alpha[1] == 0.75);
    // the kernel parts cancel; every decision equals the bias
    for (double probe : {-1.0, 0.0, 2.0}) {
        const std::vector<double> q = {probe, probe};
        CHECK(svm_decision(model, q) == doctest::Approx(model.bias).epsilon(1e-12));
    }
}

TEST_CASE("single-class binary input is rejected") {
    Matrix x(2, 1);
    x(0, 0) = 0.0;
    x(1, 0) = 1.0;
    CHECK_THROWS_AS(smo_fit_binary(x, std::vector<int>{1, 1}, KernelSpec{}), DataError);
}

TEST_CASE("pairwise votes aggregate with margins on ties") {
    // decision stubs: zero support vectors, so f(x) = bias
    auto stub = [](double bias) {
        BinarySvmModel m;
        m.bias = bias;
        m.spec = KernelSpec{.kind = KernelKind::linear};
        return m;
    };

    MulticlassSvmModel model;
    model.pairwise = {stub(1.0), stub(1.0), stub(1.0)}; // H beats B, H beats PM, B beats PM
    const std::vector<double> q = {0.0};
    Probabilities proba = svm_predict_proba(model, q);
    CHECK(proba[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
    CHECK(proba[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-6));

    // three-way cycle: H|B -> H (0.5), H|PM -> PM (2.0), B|PM -> B (1.0)
    model.pairwise = {stub(0.5), stub(-2.0), stub(1.0)};
    proba = svm_predict_proba(model, q);
    int arg = 0;
    for (int c = 1; c < 3; ++c) {
        if (proba[static_cast<std::size_t>(c)] > proba[static_cast<std::size_t>(arg)]) arg = c;
    }
    CHECK(arg == label_index(ConditionLabel::PM)); // largest |f| margin wins the tie
}

TEST_CASE("multiclass svm separates three blobs") {
    Matrix x;
    std::vector<int> y;
    make_blobs(30, 5, x, y);
    KernelSpec spec{.kind = KernelKind::rbf, .gamma = 0.1, .c = 0.75, .max_iter = 2000};
    const MulticlassSvmModel model = svm_fit(x, y, spec);

    Matrix probe;
    std::vector<int> probe_y;
    make_blobs(10, 99, probe, probe_y);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < probe.rows(); ++i) {
        const Probabilities p = svm_predict_proba(model, probe.row(i));
        int arg = 0;
        for (int c = 1; c < 3; ++c) {
            if (p[static_cast<std::size_t>(c)] > p[static_cast<std::size_t>(arg)]) arg = c;
        }
        if (arg == probe_y[i]) ++hits;
    }
    CHECK(hits == probe.rows());
}

TEST_CASE("svm_fit requires all three classes") {
    Matrix x(4, 1);
    for (std::size_t i = 0; i < 4; ++i) x(i, 0) = static_cast<double>(i);
    CHECK_THROWS_AS(svm_fit(x, std::vector<int>{0, 0, 1, 1}, KernelSpec{}), DataError);
}

TEST_CASE("dual feasibility holds for the four benchmark kernel configurations") {
    GeneratorConfig cfg;
    cfg.n = 240;
    cfg.seed = 5;
    const Dataset d = generate(cfg);
    const Matrix raw = encode(d);
    const Matrix scaled = apply_scaler(fit_scaler(raw), raw);
    const std::vector<int> y = d.label_indices();

    const std::vector<KernelSpec> configs = {
        {.kind = KernelKind::linear, .c = 1.0, .max_iter = 1000},
        {.kind = KernelKind::polynomial,
         .degree = 5,
         .coef0 = 0.75,
         .c = 1.0,
         .max_iter = 1000,
         .gamma_scale = true},
        {.kind = KernelKind::sigmoid, .gamma = 0.001, .coef0 = 0.0, .c = 0.75, .max_iter = 45},
        {.kind = KernelKind::rbf, .gamma = 0.1, .c = 0.75, .max_iter = 1000},
    };
    for (const KernelSpec& spec : configs) {
        const MulticlassSvmModel model = svm_fit(scaled, y, spec);
        REQUIRE(model.pairwise.size() == 3);
        for (const BinarySvmModel& binary : model.pairwise) {
            check_dual_feasibility(binary, spec.c);
        }
    }
}

TEST_CASE("rbf accuracy dominates the iteration-starved sigmoid configuration") {
    GeneratorConfig cfg;
    cfg.n = 400;
    cfg.seed = 6;
    const Dataset d = generate(cfg);
    const SplitResult split = stratified_split(d, 0.2, 6);

    auto accuracy_of = [&](const KernelSpec& spec) {
        SvmClassifier model(spec);
        model.fit(encode(split.train), split.train.label_indices());
        const Matrix test = encode(split.test);
        std::size_t hits = 0;
        for (std::size_t i = 0; i < test.rows(); ++i) {
            if (model.predict(test.row(i)) == *split.test.readings[i].label) ++hits;
        }
        return static_cast<double>(hits) / static_cast<double>(test.rows());
    };

    const double rbf = accuracy_of(
        {.kind = KernelKind::rbf, .gamma = 0.1, .c = 0.75, .max_iter = 1000});
    const double sigmoid = accuracy_of(
        {.kind = KernelKind::sigmoid, .gamma = 0.001, .coef0 = 0.0, .c = 0.75, .max_iter = 45});
    CHECK(rbf >= sigmoid);
}

TEST_CASE("rbf gram matrices are positive semidefinite") {
    Rng rng(7);
    for (int trial = 0; trial < 3; ++trial) {
        Matrix points(20, 4);
        for (double& v : points.data()) v = rng.uniform(-2, 2);
        KernelSpec spec{.kind = KernelKind::rbf, .gamma = 0.5};
        Matrix gram(20, 20);
        for (std::size_t i = 0; i < 20; ++i) {
            for (std::size_t j = 0; j < 20; ++j) {
                gram(i, j) = kernel_eval(spec, points.row(i), points.row(j));
            }
        }
        for (double eig : oracles::symmetric_eigenvalues(gram)) CHECK(eig >= -1e-8);
    }
}

TEST_CASE("duplicating a non-support point leaves predictions unchanged") {
    Matrix x;
    std::vector<int> labels;
    make_blobs(20, 11, x, labels);
    std::vector<int> y(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) y[i] = labels[i] == 0 ? 1 : -1;
    KernelSpec spec{.kind = KernelKind::linear, .c = 1.0, .max_iter = 5000};
    const BinarySvmModel base = smo_fit_binary(x, y, spec);

    std::ptrdiff_t non_support = -1;
    for (std::size_t i = 0; i < base.alpha.size(); ++i) {
        if (base.alpha[i] == 0.0) {
            non_support = static_cast<std::ptrdiff_t>(i);
            break;
        }
    }
    REQUIRE(non_support >= 0);

    Matrix x2(x.rows() + 1, x.cols());
    std::vector<int> y2 = y;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t j = 0; j < x.cols(); ++j) x2(i, j) = x(i, j);
    }
    for (std::size_t j = 0; j < x.cols(); ++j) {
        x2(x.rows(), j) = x(static_cast<std::size_t>(non_support), j);
    }
    y2.push_back(y[static_cast<std::size_t>(non_support)]);
    const BinarySvmModel dup = smo_fit_binary(x2, y2, spec);

    Rng rng(12);
    for (int probe = 0; probe < 50; ++probe) {
        std::vector<double> q(2);
        q[0] = rng.uniform(-3, 13);
        q[1] = rng.uniform(-3, 13);
        CHECK((svm_decision(base, q) >= 0) == (svm_decision(dup, q) >= 0));
    }
}
