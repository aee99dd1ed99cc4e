#include "motordiag/metrics.hpp"

#include <cmath>
#include <cstdio>

namespace motordiag {

namespace {

double ratio_or_zero(long long num, long long den) {
    return den > 0 ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
}

void require_nonempty(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw DataError("empty confusion matrix");
}

double per_class_f1(const BinaryCounts& b) {
    const double p = ratio_or_zero(b.tp, b.tp + b.fp);
    const double r = ratio_or_zero(b.tp, b.tp + b.fn);
    return (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

} // namespace

long long ConfusionMatrix::total() const {
    long long t = 0;
    for (std::size_t a = 0; a < k_; ++a) {
        for (std::size_t p = 0; p < k_; ++p) t += at(a, p);
    }
    return t;
}

long long ConfusionMatrix::trace() const {
    long long t = 0;
    for (std::size_t c = 0; c < k_; ++c) t += at(c, c);
    return t;
}

long long ConfusionMatrix::row_sum(std::size_t actual) const {
    long long t = 0;
    for (std::size_t p = 0; p < k_; ++p) t += at(actual, p);
    return t;
}

long long ConfusionMatrix::col_sum(std::size_t predicted) const {
    long long t = 0;
    for (std::size_t a = 0; a < k_; ++a) t += at(a, predicted);
    return t;
}

ConfusionMatrix confusion_matrix(std::span<const int> actual, std::span<const int> predicted,
                                 std::size_t num_classes) {
    if (actual.size() != predicted.size()) {
        throw DataError("actual and predicted label sequences differ in length");
    }
    if (actual.empty()) throw DataError("cannot build a confusion matrix from no samples");
    ConfusionMatrix cm(num_classes);
    for (std::size_t i = 0; i < actual.size(); ++i) {
        ++cm.at(static_cast<std::size_t>(actual[i]), static_cast<std::size_t>(predicted[i]));
    }
    return cm;
}

ConfusionMatrix confusion_matrix(const std::vector<ConditionLabel>& actual,
                                 const std::vector<ConditionLabel>& predicted) {
    std::vector<int> a, p;
    a.reserve(actual.size());
    p.reserve(predicted.size());
    for (ConditionLabel l : actual) a.push_back(label_index(l));
    for (ConditionLabel l : predicted) p.push_back(label_index(l));
    return confusion_matrix(a, p, kNumClasses);
}

BinaryCounts binary_counts(const ConfusionMatrix& cm, std::size_t class_index) {
    if (class_index >= cm.classes()) throw DataError("class index out of range");
    BinaryCounts b;
    b.tp = cm.at(class_index, class_index);
    b.fp = cm.col_sum(class_index) - b.tp;
    b.fn = cm.row_sum(class_index) - b.tp;
    b.tn = cm.total() - b.tp - b.fp - b.fn;
    return b;
}

double accuracy(const ConfusionMatrix& cm) {
    require_nonempty(cm);
    return static_cast<double>(cm.trace()) / static_cast<double>(cm.total());
}

double precision_macro(const ConfusionMatrix& cm) {
    require_nonempty(cm);
    double sum = 0.0;
    for (std::size_t c = 0; c < cm.classes(); ++c) {
        const BinaryCounts b = binary_counts(cm, c);
        sum += ratio_or_zero(b.tp, b.tp + b.fp);
    }
    return sum / static_cast<double>(cm.classes());
}

double recall_macro(const ConfusionMatrix& cm) {
    require_nonempty(cm);
    double sum = 0.0;
    for (std::size_t c = 0; c < cm.classes(); ++c) {
        const BinaryCounts b = binary_counts(cm, c);
        sum += ratio_or_zero(b.tp, b.tp + b.fn);
    }
    return sum / static_cast<double>(cm.classes());
}

double specificity_macro(const ConfusionMatrix& cm) {
    require_nonempty(cm);
    double sum = 0.0;
    for (std::size_t c = 0; c < cm.classes(); ++c) {
        const BinaryCounts b = binary_counts(cm, c);
        sum += ratio_or_zero(b.tn, b.tn + b.fp);
    }
    return sum / static_cast<double>(cm.classes());
}

double f1_macro(const ConfusionMatrix& cm) {
    require_nonempty(cm);
    double sum = 0.0;
    for (std::size_t c = 0; c < cm.classes(); ++c) {
        sum += per_class_f1(binary_counts(cm, c));
    }
    return sum / static_cast<double>(cm.classes());
}

MetricReport evaluate(const ConfusionMatrix& cm) {
    MetricReport report;
    report.accuracy = accuracy(cm);
    report.precision_macro = precision_macro(cm);
    report.recall_macro = recall_macro(cm);
    report.specificity_macro = specificity_macro(cm);
    report.f1_macro = f1_macro(cm);
    return report;
}

std::string format_percent(double value) {
    // round half-up to 2 decimals before printing
    const double rounded = std::floor(value * 100.0 * 100.0 + 0.5) / 100.0;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", rounded);
    return buf;
}

std::string metric_report_text(const MetricReport& report) {
    std::string out;
    out += "accuracy = " + format_percent(report.accuracy) + "\n";
    out += "precision_macro = " + format_percent(report.precision_macro) + "\n";
    out += "recall_macro = " + format_percent(report.recall_macro) + "\n";
    out += "specificity_macro = " + format_percent(report.specificity_macro) + "\n";
    out += "f1_macro = " + format_percent(report.f1_macro) + "\n";
    return out;
}

} // namespace motordiag
