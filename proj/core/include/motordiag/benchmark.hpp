#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "motordiag/archive.hpp"
#include "motordiag/classifier.hpp"
#include "motordiag/metrics.hpp"
#include "motordiag/model_config.hpp"

namespace motordiag {

struct BenchmarkRow {
    std::string model;
    double accuracy = 0.0; // fraction in [0,1]
};

/// Table of per-model test accuracies (ascending, name ties lexicographic)
/// plus the best model's confusion matrix and metrics, and the dataset
/// fingerprint that produced them.
struct BenchmarkReport {
    std::vector<BenchmarkRow> ranking;
    std::string best_model;
    ConfusionMatrix best_confusion{3};
    MetricReport best_metrics;
    std::size_t dataset_size = 0;
    std::uint64_t split_seed = 0;
    double test_fraction = 0.2;
};

/// Fits every configuration on one shared stratified split and evaluates it
/// on the held-out part. Model failures are rethrown annotated with the
/// model name.
BenchmarkReport run_benchmark(const Dataset& dataset, std::uint64_t split_seed,
                              double test_fraction, const ModelConfigSet& configs);

enum class ReportFormat { text, json };

ReportFormat parse_report_format(const std::string& token);

/// Text: the accuracy table, the 3x3 confusion matrix with class names and
/// the five metrics as percents with two decimals. JSON: the same content as
/// a stable structured document; both renderings agree on every number.
std::string render_report(const BenchmarkReport& report, ReportFormat format);

std::string render_metric_report(const MetricReport& report, const ConfusionMatrix& cm,
                                 ReportFormat format);

struct Diagnosis {
    ConditionLabel label = ConditionLabel::H;
    Probabilities probabilities{};
};

/// Encodes the reading (label ignored if present) and predicts with a loaded
/// model. Scaling, where the model requires it, is part of the model state.
Diagnosis diagnose(const Classifier& model, const MotorReading& reading);

std::string render_diagnosis(const Diagnosis& diagnosis, ReportFormat format);

} // namespace motordiag
