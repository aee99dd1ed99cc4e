#include "motordiag/benchmark.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include <json.hpp>

namespace motordiag {

namespace {

double two_decimal_percent(double value) {
    return std::floor(value * 100.0 * 100.0 + 0.5) / 100.0;
}

nlohmann::json confusion_json(const ConfusionMatrix& cm) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t a = 0; a < cm.classes(); ++a) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t p = 0; p < cm.classes(); ++p) row.push_back(cm.at(a, p));
        rows.push_back(row);
    }
    return rows;
}

nlohmann::json metrics_json(const MetricReport& report) {
    return {{"accuracy", two_decimal_percent(report.accuracy)},
            {"precision_macro", two_decimal_percent(report.precision_macro)},
            {"recall_macro", two_decimal_percent(report.recall_macro)},
            {"specificity_macro", two_decimal_percent(report.specificity_macro)},
            {"f1_macro", two_decimal_percent(report.f1_macro)}};
}

std::string confusion_text(const ConfusionMatrix& cm) {
    std::ostringstream out;
    out << "Confusion matrix (rows actual, columns predicted)\n";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "  %-10s", "");
    out << buf;
    for (int c = 0; c < kNumClasses; ++c) {
        std::snprintf(buf, sizeof(buf), " %9s", label_display_name(label_from_index(c)));
        out << buf;
    }
    out << '\n';
    for (int a = 0; a < kNumClasses; ++a) {
        std::snprintf(buf, sizeof(buf), "  %-10s", label_display_name(label_from_index(a)));
        out << buf;
        for (int p = 0; p < kNumClasses; ++p) {
            std::snprintf(buf, sizeof(buf), " %9lld",
                          cm.at(static_cast<std::size_t>(a), static_cast<std::size_t>(p)));
            out << buf;
        }
        out << '\n';
    }
    return out.str();
}

} // namespace

BenchmarkReport run_benchmark(const Dataset& dataset, std::uint64_t split_seed,
                              double test_fraction, const ModelConfigSet& configs) {
    if (!dataset.labeled()) throw DataError("benchmark requires a labeled dataset");
    if (dataset.size() < 50) throw DataError("benchmark requires at least 50 samples");

    const SplitResult split = stratified_split(dataset, test_fraction, split_seed);
    const Matrix train_x = encode(split.train);
    const Matrix test_x = encode(split.test);
    const std::vector<int> train_y = split.train.label_indices();
    const std::vector<ConditionLabel> test_labels = [&] {
        std::vector<ConditionLabel> out;
        for (const MotorReading& r : split.test.readings) out.push_back(*r.label);
        return out;
    }();

    BenchmarkReport report;
    report.dataset_size = dataset.size();
    report.split_seed = split_seed;
    report.test_fraction = test_fraction;

    std::vector<std::vector<ConditionLabel>> predictions;
    for (const std::string& name : ModelConfigSet::model_names()) {
        try {
            auto model = configs.make(name);
            model->fit(train_x, train_y);
            predictions.push_back(predict_all(*model, test_x));
            const ConfusionMatrix cm = confusion_matrix(test_labels, predictions.back());
            report.ranking.push_back({name, accuracy(cm)});
        } catch (const ParseError&) {
            throw;
        } catch (const std::exception& e) {
            throw ModelError("model " + name + ": " + e.what());
        }
    }

    std::vector<std::size_t> order(report.ranking.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (report.ranking[a].accuracy != report.ranking[b].accuracy) {
            return report.ranking[a].accuracy < report.ranking[b].accuracy;
        }
        return report.ranking[a].model < report.ranking[b].model;
    });

    std::vector<BenchmarkRow> sorted;
    for (std::size_t idx : order) sorted.push_back(report.ranking[idx]);
    const std::size_t best_idx = order.back();
    report.ranking = std::move(sorted);
    report.best_model = report.ranking.back().model;
    report.best_confusion = confusion_matrix(test_labels, predictions[best_idx]);
    report.best_metrics = evaluate(report.best_confusion);
    return report;
}

ReportFormat parse_report_format(const std::string& token) {
    if (token == "text") return ReportFormat::text;
    if (token == "json") return ReportFormat::json;
    throw DataError("unknown report format '" + token + "' (expected text or json)");
}

std::string render_report(const BenchmarkReport& report, ReportFormat format) {
    if (report.ranking.empty()) throw DataError("cannot render a report with no models");

    if (format == ReportFormat::json) {
        nlohmann::json doc;
        doc["dataset"] = {{"n", report.dataset_size},
                          {"split_seed", report.split_seed},
                          {"test_fraction", report.test_fraction}};
        nlohmann::json ranking = nlohmann::json::array();
        for (const BenchmarkRow& row : report.ranking) {
            ranking.push_back(
                {{"model", row.model}, {"accuracy", two_decimal_percent(row.accuracy)}});
        }
        doc["ranking"] = ranking;
        doc["best"] = {{"model", report.best_model},
                       {"confusion", confusion_json(report.best_confusion)},
                       {"metrics", metrics_json(report.best_metrics)}};
        return doc.dump(2) + "\n";
    }

    std::ostringstream out;
    char buf[128];
    std::snprintf(buf, sizeof(buf), "Benchmark: n=%zu, split_seed=%llu, test_fraction=%.2f\n\n",
                  report.dataset_size, static_cast<unsigned long long>(report.split_seed),
                  report.test_fraction);
    out << buf;
    out << "Model ranking (test accuracy, %)\n";
    for (const BenchmarkRow& row : report.ranking) {
        std::snprintf(buf, sizeof(buf), "  %-12s %6s\n", row.model.c_str(),
                      format_percent(row.accuracy).c_str());
        out << buf;
    }
    out << "\nBest model: " << report.best_model << "\n\n";
    out << confusion_text(report.best_confusion);
    out << '\n' << metric_report_text(report.best_metrics);
    return out.str();
}

std::string render_metric_report(const MetricReport& report, const ConfusionMatrix& cm,
                                 ReportFormat format) {
    if (format == ReportFormat::json) {
        nlohmann::json doc;
        doc["confusion"] = confusion_json(cm);
        doc["metrics"] = metrics_json(report);
        doc["n"] = cm.total();
        return doc.dump(2) + "\n";
    }
    std::string out = confusion_text(cm);
    out += '\n';
    out += metric_report_text(report);
    return out;
}

Diagnosis diagnose(const Classifier& model, const MotorReading& reading) {
    validate(reading);
    const FeatureVector x = encode(reading);
    Diagnosis d;
    d.probabilities = model.predict_proba(x);
    d.label = label_from_index(argmax_class(d.probabilities));
    return d;
}

std::string render_diagnosis(const Diagnosis& diagnosis, ReportFormat format) {
    if (format == ReportFormat::json) {
        nlohmann::json doc;
        doc["label"] = label_token(diagnosis.label);
        doc["probabilities"] = {{"H", diagnosis.probabilities[0]},
                                {"B", diagnosis.probabilities[1]},
                                {"PM", diagnosis.probabilities[2]}};
        return doc.dump(2) + "\n";
    }
    std::ostringstream out;
    out << "label: " << label_token(diagnosis.label) << " ("
        << label_display_name(diagnosis.label) << ")\n";
    char buf[64];
    for (int c = 0; c < kNumClasses; ++c) {
        std::snprintf(buf, sizeof(buf), "p(%s) = %.6f\n", label_token(label_from_index(c)),
                      diagnosis.probabilities[static_cast<std::size_t>(c)]);
        out << buf;
    }
    return out.str();
}

} // namespace motordiag
