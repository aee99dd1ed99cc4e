#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "motordiag/archive.hpp"
#include "motordiag/benchmark.hpp"
#include "motordiag/error.hpp"
#include "motordiag/model_config.hpp"
#include "motordiag/synth.hpp"

namespace {

using namespace motordiag;

// Exit codes: 0 success, 1 usage error, 2 data error, 3 model error.
constexpr int kUsageError = 1;
constexpr int kDataError = 2;
constexpr int kModelError = 3;

void write_output(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + out_path + "'");
    out << text;
}

std::array<double, 3> parse_triple(const std::string& text, const char* what) {
    std::array<double, 3> values{};
    std::stringstream ss(text);
    std::string token;
    std::size_t i = 0;
    while (std::getline(ss, token, ',')) {
        if (i >= 3) throw DataError(std::string(what) + " needs exactly 3 comma-separated values");
        values[i++] = std::stod(token);
    }
    if (i != 3) throw DataError(std::string(what) + " needs exactly 3 comma-separated values");
    return values;
}

ModelConfigSet load_configs(const std::string& config_path) {
    ModelConfigSet configs = ModelConfigSet::defaults();
    if (!config_path.empty()) configs.apply(KeyValueConfig::from_file(config_path));
    return configs;
}

/// Parses `prediction CSV` for the metrics subcommand: header `actual,predicted`,
/// one pair of H/B/PM tokens per row.
ConfusionMatrix parse_prediction_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("missing header row");
    auto strip = [](std::string s) {
        while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
        return s;
    };
    if (strip(line) != "actual,predicted") {
        throw ParseError("header must be 'actual,predicted', got '" + line + "'");
    }
    std::vector<ConditionLabel> actual, predicted;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        line = strip(line);
        if (line.empty()) continue;
        ++row;
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw ParseError("row " + std::to_string(row) + ": expected 2 columns", row);
        }
        auto a = parse_label_token(line.substr(0, comma));
        auto p = parse_label_token(line.substr(comma + 1));
        if (!a || !p) {
            throw ParseError("row " + std::to_string(row) + ": unknown label token", row);
        }
        actual.push_back(*a);
        predicted.push_back(*p);
    }
    return confusion_matrix(actual, predicted);
}

int run(int argc, char** argv) {
    CLI::App app{"Electric-motor condition diagnosis toolkit"};
    app.require_subcommand(1);

    // generate
    auto* generate_cmd = app.add_subcommand("generate", "Generate a synthetic dataset CSV");
    std::size_t gen_n = 1050;
    std::uint64_t gen_seed = 42;
    std::string gen_mix = "0.36,0.34,0.30";
    double gen_noise = 0.0;
    std::string gen_out;
    generate_cmd->add_option("--n", gen_n, "Number of rows");
    generate_cmd->add_option("--seed", gen_seed, "Generator seed");
    generate_cmd->add_option("--mix", gen_mix, "Class mix H,B,PM (sums to 1)");
    generate_cmd->add_option("--label-noise", gen_noise, "Fraction of labels randomized");
    generate_cmd->add_option("--out", gen_out, "Output CSV path (default stdout)");

    // benchmark
    auto* benchmark_cmd = app.add_subcommand("benchmark", "Train and rank all eleven models");
    std::string bench_csv;
    std::uint64_t bench_seed = 42;
    double bench_fraction = 0.2;
    std::string bench_format = "text";
    std::string bench_out;
    std::string bench_config;
    benchmark_cmd->add_option("csv", bench_csv, "Labeled dataset CSV")->required();
    benchmark_cmd->add_option("--seed", bench_seed, "Split seed");
    benchmark_cmd->add_option("--test-fraction", bench_fraction, "Held-out fraction");
    benchmark_cmd->add_option("--format", bench_format, "text or json");
    benchmark_cmd->add_option("--out", bench_out, "Output path (default stdout)");
    benchmark_cmd->add_option("--config", bench_config, "Key-value config file");

    // train
    auto* train_cmd = app.add_subcommand("train", "Fit one model and save an archive");
    std::string train_csv, train_model, train_out, train_config;
    train_cmd->add_option("csv", train_csv, "Labeled dataset CSV")->required();
    train_cmd->add_option("--model", train_model, "Model name (NB, SVM-Linear, ..., CAT)")
        ->required();
    train_cmd->add_option("--out", train_out, "Archive path")->required();
    train_cmd->add_option("--config", train_config, "Key-value config file");

    // diagnose
    auto* diagnose_cmd = app.add_subcommand("diagnose", "Classify a single reading");
    std::string diag_archive, diag_row, diag_format = "text";
    double diag_tep = 0.0;
    std::string diag_ci, diag_cr, diag_sound = "Normal";
    bool diag_have_tep = false;
    diagnose_cmd->add_option("archive", diag_archive, "Model archive path")->required();
    diagnose_cmd->add_option("--row", diag_row, "Full CSV data row (8 or 9 columns)");
    diagnose_cmd->add_option("--tep", diag_tep, "Temperature, degC")
        ->each([&](const std::string&) { diag_have_tep = true; });
    diagnose_cmd->add_option("--ci", diag_ci, "Phase currents A, e.g. 280,280,280");
    diagnose_cmd->add_option("--cr", diag_cr, "Winding resistances Ohm; 'of' for open");
    diagnose_cmd->add_option("--sound", diag_sound, "Normal or ABN");
    diagnose_cmd->add_option("--format", diag_format, "text or json");

    // metrics
    auto* metrics_cmd = app.add_subcommand("metrics", "Evaluate a prediction CSV");
    std::string metrics_csv, metrics_format = "text", metrics_out;
    metrics_cmd->add_option("csv", metrics_csv, "CSV with header actual,predicted")->required();
    metrics_cmd->add_option("--format", metrics_format, "text or json");
    metrics_cmd->add_option("--out", metrics_out, "Output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e); // prints the message or requested help text
        return code == 0 ? 0 : kUsageError;
    }

    if (generate_cmd->parsed()) {
        GeneratorConfig cfg;
        cfg.n = gen_n;
        cfg.seed = gen_seed;
        cfg.class_mix = parse_triple(gen_mix, "--mix");
        cfg.label_noise = gen_noise;
        const Dataset dataset = generate(cfg);
        write_output(serialize_csv_text(dataset), gen_out);
        return 0;
    }

    if (benchmark_cmd->parsed()) {
        const Dataset dataset = load_csv_file(bench_csv);
        const ModelConfigSet configs = load_configs(bench_config);
        const BenchmarkReport report =
            run_benchmark(dataset, bench_seed, bench_fraction, configs);
        write_output(render_report(report, parse_report_format(bench_format)), bench_out);
        return 0;
    }

    if (train_cmd->parsed()) {
        const Dataset dataset = load_csv_file(train_csv);
        const ModelConfigSet configs = load_configs(train_config);
        auto model = configs.make(train_model);
        model->fit(encode(dataset), dataset.label_indices());
        save_model(*model, train_model, train_out);
        std::cout << "saved " << train_model << " to " << train_out << "\n";
        return 0;
    }

    if (diagnose_cmd->parsed()) {
        MotorReading reading;
        if (!diag_row.empty()) {
            reading = parse_csv_row(diag_row);
        } else {
            if (!diag_have_tep || diag_ci.empty() || diag_cr.empty()) {
                std::cerr << "diagnose needs --row or all of --tep/--ci/--cr\n";
                return kUsageError;
            }
            reading.tep = diag_tep;
            reading.ci = parse_triple(diag_ci, "--ci");
            std::stringstream ss(diag_cr);
            std::string token;
            std::size_t i = 0;
            while (std::getline(ss, token, ',') && i < 3) {
                if (token == "of" || token == "OF" || token == "Of" || token == "oF") {
                    reading.cr[i] = Resistance::open_circuit();
                } else {
                    reading.cr[i] = Resistance::value(std::stod(token));
                }
                ++i;
            }
            if (i != 3) throw DataError("--cr needs exactly 3 comma-separated values");
            if (diag_sound == "Normal") {
                reading.sound = Sound::normal;
            } else if (diag_sound == "ABN") {
                reading.sound = Sound::abnormal;
            } else {
                throw DataError("--sound must be Normal or ABN");
            }
        }
        const LoadedModel loaded = load_model(diag_archive);
        const Diagnosis result = diagnose(*loaded.model, reading);
        std::cout << render_diagnosis(result, parse_report_format(diag_format));
        return 0;
    }

    if (metrics_cmd->parsed()) {
        std::ifstream in(metrics_csv);
        if (!in) throw DataError("cannot open '" + metrics_csv + "'");
        const ConfusionMatrix cm = parse_prediction_csv(in);
        write_output(render_metric_report(evaluate(cm), cm, parse_report_format(metrics_format)),
                     metrics_out);
        return 0;
    }

    return kUsageError;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ParseError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kDataError;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kDataError;
    } catch (const ModelError& e) {
        std::cerr << "model error: " << e.what() << "\n";
        return kModelError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsageError;
    }
}
