#include "motordiag/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "motordiag/archive.hpp"

namespace motordiag {

namespace {

double dot(std::span<const double> x, std::span<const double> z) {
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) s += x[j] * z[j];
    return s;
}

double int_pow(double base, int exponent) {
    double r = 1.0;
    for (int e = 0; e < exponent; ++e) r *= base;
    return r;
}

/// gamma = 1 / (channels * mean channel variance), the "scale" convention.
double scale_gamma(const Matrix& features) {
    const std::size_t n = features.rows();
    const std::size_t d = features.cols();
    double var_sum = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += features(i, j);
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double dv = features(i, j) - mean;
            ss += dv * dv;
        }
        var_sum += ss / static_cast<double>(n);
    }
    const double mean_var = var_sum / static_cast<double>(d);
    return 1.0 / std::max(static_cast<double>(d) * mean_var, 1e-12);
}

struct VoteResult {
    std::array<double, 3> votes{};
    std::array<double, 3> margin{};
};

} // namespace

double kernel_eval(const KernelSpec& spec, std::span<const double> x, std::span<const double> z) {
    if (x.size() != z.size()) throw DataError("kernel_eval dimension mismatch");
    switch (spec.kind) {
        case KernelKind::linear:
            return dot(x, z);
        case KernelKind::polynomial:
            return int_pow(spec.gamma * dot(x, z) + spec.coef0, spec.degree);
        case KernelKind::sigmoid:
            return std::tanh(spec.gamma * dot(x, z) + spec.coef0);
        case KernelKind::rbf: {
            double d2 = 0.0;
            for (std::size_t j = 0; j < x.size(); ++j) {
                const double d = x[j] - z[j];
                d2 += d * d;
            }
            return std::exp(-spec.gamma * d2);
        }
    }
    throw ModelError("unknown kernel kind");
}

BinarySvmModel smo_fit_binary(const Matrix& scaled_features, std::span<const int> y,
                              KernelSpec spec, double tol) {
    const std::size_t n = scaled_features.rows();
    if (n == 0 || n != y.size()) throw DataError("smo_fit_binary needs matching features/labels");
    bool has_pos = false, has_neg = false;
    for (int v : y) {
        if (v == 1) has_pos = true;
        else if (v == -1) has_neg = true;
        else throw DataError("binary labels must be +1 or -1");
    }
    if (!has_pos || !has_neg) throw DataError("smo_fit_binary needs both classes");
    if (spec.gamma_scale) {
        spec.gamma = scale_gamma(scaled_features);
        spec.gamma_scale = false;
    }
    const double c = spec.c;

    // Gram cache; problems here are at most ~1k samples.
    Matrix gram(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            const double k = kernel_eval(spec, scaled_features.row(i), scaled_features.row(j));
            gram(i, j) = k;
            gram(j, i) = k;
        }
    }

    std::vector<double> alpha(n, 0.0);
    std::vector<double> f(n, 0.0); // f_i = sum_j alpha_j y_j K_ij (no bias)

    auto in_up = [&](std::size_t t) {
        return (y[t] == 1 && alpha[t] < c) || (y[t] == -1 && alpha[t] > 0.0);
    };
    auto in_low = [&](std::size_t t) {
        return (y[t] == -1 && alpha[t] < c) || (y[t] == 1 && alpha[t] > 0.0);
    };

    // Maximal-violating-pair SMO. Each update is preceded by one full scan,
    // so max_iter caps the number of passes over the data.
    for (int iter = 0; iter < spec.max_iter; ++iter) {
        double up_best = -std::numeric_limits<double>::infinity();
        double low_best = std::numeric_limits<double>::infinity();
        std::ptrdiff_t i = -1, j = -1;
        for (std::size_t t = 0; t < n; ++t) {
            const double v = static_cast<double>(y[t]) - f[t];
            if (in_up(t) && v > up_best) {
                up_best = v;
                i = static_cast<std::ptrdiff_t>(t);
            }
            if (in_low(t) && v < low_best) {
                low_best = v;
                j = static_cast<std::ptrdiff_t>(t);
            }
        }
        if (i < 0 || j < 0 || up_best - low_best < tol) break;
        const auto ii = static_cast<std::size_t>(i);
        const auto jj = static_cast<std::size_t>(j);

        double eta = gram(ii, ii) + gram(jj, jj) - 2.0 * gram(ii, jj);
        if (eta <= 0.0) eta = 1e-12; // non-PSD kernels (sigmoid): step to the box edge

        double lo, hi;
        if (y[ii] != y[jj]) {
            lo = std::max(0.0, alpha[jj] - alpha[ii]);
            hi = std::min(c, c + alpha[jj] - alpha[ii]);
        } else {
            lo = std::max(0.0, alpha[ii] + alpha[jj] - c);
            hi = std::min(c, alpha[ii] + alpha[jj]);
        }
        const double delta = static_cast<double>(y[jj]) * ((f[ii] - y[ii]) - (f[jj] - y[jj])) / eta;
        const double new_j = std::clamp(alpha[jj] + delta, lo, hi);
        if (std::abs(new_j - alpha[jj]) < 1e-15) break; // numerically stuck pair
        const double new_i =
            std::clamp(alpha[ii] + y[ii] * y[jj] * (alpha[jj] - new_j), 0.0, c);

        const double di = new_i - alpha[ii];
        const double dj = new_j - alpha[jj];
        alpha[ii] = new_i;
        alpha[jj] = new_j;
        for (std::size_t t = 0; t < n; ++t) {
            f[t] += di * y[ii] * gram(ii, t) + dj * y[jj] * gram(jj, t);
        }
    }

    // Bias from free support vectors, else from the bound midpoint.
    double free_sum = 0.0;
    std::size_t free_count = 0;
    double up_best = -std::numeric_limits<double>::infinity();
    double low_best = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
        if (alpha[t] > 0.0 && alpha[t] < c) {
            free_sum += static_cast<double>(y[t]) - f[t];
            ++free_count;
        }
        const double v = static_cast<double>(y[t]) - f[t];
        if (in_up(t)) up_best = std::max(up_best, v);
        if (in_low(t)) low_best = std::min(low_best, v);
    }
    double bias;
    if (free_count > 0) {
        bias = free_sum / static_cast<double>(free_count);
    } else if (std::isfinite(up_best) && std::isfinite(low_best)) {
        bias = 0.5 * (up_best + low_best);
    } else {
        bias = 0.0;
    }

    BinarySvmModel model;
    model.spec = spec;
    model.bias = bias;
    model.alpha = alpha;
    model.train_y.assign(y.begin(), y.end());
    std::size_t sv_count = 0;
    for (double a : alpha) {
        if (a > 0.0) ++sv_count;
    }
    model.support_vectors = Matrix(sv_count, scaled_features.cols());
    model.coef.reserve(sv_count);
    std::size_t row = 0;
    for (std::size_t t = 0; t < n; ++t) {
        if (alpha[t] <= 0.0) continue;
        std::copy(scaled_features.row(t).begin(), scaled_features.row(t).end(),
                  model.support_vectors.row(row).begin());
        model.coef.push_back(alpha[t] * static_cast<double>(y[t]));
        ++row;
    }
    return model;
}

double svm_decision(const BinarySvmModel& model, std::span<const double> x) {
    double f = model.bias;
    for (std::size_t i = 0; i < model.support_vectors.rows(); ++i) {
        f += model.coef[i] * kernel_eval(model.spec, model.support_vectors.row(i), x);
    }
    return f;
}

MulticlassSvmModel svm_fit(const Matrix& scaled_features, std::span<const int> labels,
                           KernelSpec spec) {
    if (scaled_features.rows() != labels.size()) throw DataError("feature/label count mismatch");
    std::array<std::vector<std::size_t>, 3> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        by_class[static_cast<std::size_t>(labels[i])].push_back(i);
    }
    for (int c = 0; c < kNumClasses; ++c) {
        if (by_class[static_cast<std::size_t>(c)].empty()) {
            throw DataError(std::string("svm_fit: class ") +
                            label_token(label_from_index(c)) + " missing from training data");
        }
    }
    if (spec.gamma_scale) {
        spec.gamma = scale_gamma(scaled_features);
        spec.gamma_scale = false;
    }

    MulticlassSvmModel model;
    const std::array<std::pair<int, int>, 3> pairs = {{{0, 1}, {0, 2}, {1, 2}}};
    for (const auto& [a, b] : pairs) {
        const auto& ia = by_class[static_cast<std::size_t>(a)];
        const auto& ib = by_class[static_cast<std::size_t>(b)];
        Matrix sub(ia.size() + ib.size(), scaled_features.cols());
        std::vector<int> suby(ia.size() + ib.size());
        std::size_t r = 0;
        for (std::size_t idx : ia) {
            std::copy(scaled_features.row(idx).begin(), scaled_features.row(idx).end(),
                      sub.row(r).begin());
            suby[r++] = 1;
        }
        for (std::size_t idx : ib) {
            std::copy(scaled_features.row(idx).begin(), scaled_features.row(idx).end(),
                      sub.row(r).begin());
            suby[r++] = -1;
        }
        model.pairwise.push_back(smo_fit_binary(sub, suby, spec));
    }
    return model;
}

Probabilities svm_predict_proba(const MulticlassSvmModel& model, std::span<const double> x) {
    const std::array<std::pair<int, int>, 3> pairs = {{{0, 1}, {0, 2}, {1, 2}}};
    VoteResult vote;
    for (std::size_t m = 0; m < pairs.size(); ++m) {
        const double f = svm_decision(model.pairwise[m], x);
        const int winner = f >= 0.0 ? pairs[m].first : pairs[m].second;
        vote.votes[static_cast<std::size_t>(winner)] += 1.0;
        vote.margin[static_cast<std::size_t>(winner)] += std::abs(f);
    }

    Probabilities proba{};
    const double denom = 3.0 + 3.0e-9;
    for (std::size_t c = 0; c < proba.size(); ++c) {
        proba[c] = (vote.votes[c] + 1e-9) / denom;
    }

    const double top = *std::max_element(vote.votes.begin(), vote.votes.end());
    int tied = 0, winner = -1;
    double winner_margin = -1.0;
    for (int c = 0; c < kNumClasses; ++c) {
        const auto cc = static_cast<std::size_t>(c);
        if (vote.votes[cc] != top) continue;
        ++tied;
        if (vote.margin[cc] > winner_margin) {
            winner_margin = vote.margin[cc];
            winner = c;
        }
    }
    if (tied > 1) proba = nudge_winner(proba, winner);
    return proba;
}

void SvmClassifier::fit(const Matrix& features, std::span<const int> labels) {
    scaler_ = fit_scaler(features);
    model_ = svm_fit(apply_scaler(scaler_, features), labels, spec_);
}

Probabilities SvmClassifier::predict_proba(std::span<const double> x) const {
    return svm_predict_proba(model_, apply_scaler(scaler_, x));
}

namespace {

void save_spec(BinaryWriter& out, const KernelSpec& spec) {
    out.u8(static_cast<std::uint8_t>(spec.kind));
    out.i64(spec.degree);
    out.f64(spec.gamma);
    out.f64(spec.coef0);
    out.f64(spec.c);
    out.i64(spec.max_iter);
    out.u8(spec.gamma_scale ? 1 : 0);
}

KernelSpec load_spec(BinaryReader& in) {
    KernelSpec spec;
    spec.kind = static_cast<KernelKind>(in.u8());
    spec.degree = static_cast<int>(in.i64());
    spec.gamma = in.f64();
    spec.coef0 = in.f64();
    spec.c = in.f64();
    spec.max_iter = static_cast<int>(in.i64());
    spec.gamma_scale = in.u8() != 0;
    return spec;
}

} // namespace

void SvmClassifier::save(BinaryWriter& out) const {
    save_spec(out, spec_);
    out.f64_vec(scaler_.mean);
    out.f64_vec(scaler_.std);
    out.u64(model_.pairwise.size());
    for (const BinarySvmModel& b : model_.pairwise) {
        save_spec(out, b.spec);
        out.f64(b.bias);
        out.u64(b.support_vectors.rows());
        out.u64(b.support_vectors.cols());
        out.f64_vec(b.support_vectors.data());
        out.f64_vec(b.coef);
        out.f64_vec(b.alpha);
        std::vector<long long> ty(b.train_y.begin(), b.train_y.end());
        out.i64_vec(ty);
    }
}

void SvmClassifier::load(BinaryReader& in) {
    spec_ = load_spec(in);
    auto mean = in.f64_vec();
    auto sd = in.f64_vec();
    std::copy(mean.begin(), mean.end(), scaler_.mean.begin());
    std::copy(sd.begin(), sd.end(), scaler_.std.begin());
    model_ = {};
    const std::size_t count = in.u64();
    for (std::size_t m = 0; m < count; ++m) {
        BinarySvmModel b;
        b.spec = load_spec(in);
        b.bias = in.f64();
        const std::size_t rows = in.u64();
        const std::size_t cols = in.u64();
        b.support_vectors = Matrix(rows, cols);
        b.support_vectors.data() = in.f64_vec();
        if (b.support_vectors.data().size() != rows * cols) {
            throw ArchiveError("svm support vector size mismatch");
        }
        b.coef = in.f64_vec();
        b.alpha = in.f64_vec();
        for (long long v : in.i64_vec()) b.train_y.push_back(static_cast<int>(v));
        model_.pairwise.push_back(std::move(b));
    }
}

} // namespace motordiag
