#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "motordiag/dataset.hpp"

namespace motordiag {

/// K x K confusion counts: rows are actual classes, columns are predicted.
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(std::size_t num_classes)
        : k_(num_classes), counts_(num_classes * num_classes, 0) {}

    std::size_t classes() const { return k_; }

    long long& at(std::size_t actual, std::size_t predicted) {
        check(actual, predicted);
        return counts_[actual * k_ + predicted];
    }
    long long at(std::size_t actual, std::size_t predicted) const {
        check(actual, predicted);
        return counts_[actual * k_ + predicted];
    }

    long long total() const;
    long long trace() const;
    long long row_sum(std::size_t actual) const;
    long long col_sum(std::size_t predicted) const;

    bool operator==(const ConfusionMatrix&) const = default;

private:
    void check(std::size_t a, std::size_t p) const {
        if (a >= k_ || p >= k_) throw DataError("confusion matrix index out of range");
    }

    std::size_t k_;
    std::vector<long long> counts_;
};

/// One-vs-rest counts for a single class.
struct BinaryCounts {
    long long tp = 0, fp = 0, tn = 0, fn = 0;
};

/// The five evaluation measures, all in [0,1]. Macro averages are the
/// unweighted mean of one-vs-rest per-class values; a per-class value with a
/// zero denominator contributes 0 and is still averaged.
struct MetricReport {
    double accuracy = 0.0;
    double precision_macro = 0.0;
    double recall_macro = 0.0;
    double specificity_macro = 0.0;
    double f1_macro = 0.0;
};

ConfusionMatrix confusion_matrix(std::span<const int> actual, std::span<const int> predicted,
                                 std::size_t num_classes);
ConfusionMatrix confusion_matrix(const std::vector<ConditionLabel>& actual,
                                 const std::vector<ConditionLabel>& predicted);

BinaryCounts binary_counts(const ConfusionMatrix& cm, std::size_t class_index);

double accuracy(const ConfusionMatrix& cm);
double precision_macro(const ConfusionMatrix& cm);
double recall_macro(const ConfusionMatrix& cm);
double specificity_macro(const ConfusionMatrix& cm);
double f1_macro(const ConfusionMatrix& cm);

MetricReport evaluate(const ConfusionMatrix& cm);

/// Percent with two decimals, half-up: 0.928571 -> "92.86".
std::string format_percent(double value);

/// Flat `key = value` block with percents to two decimals.
std::string metric_report_text(const MetricReport& report);

} // namespace motordiag
