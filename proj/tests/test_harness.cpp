#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "motordiag/benchmark.hpp"
#include "motordiag/synth.hpp"

using namespace motordiag;

namespace {

/// Small hyperparameters so the full 11-model benchmark stays fast in unit tests.
ModelConfigSet fast_configs() {
    ModelConfigSet configs = ModelConfigSet::defaults();
    configs.apply(KeyValueConfig::parse(
        "rf.n_estimators = 25\n"
        "xgb.rounds = 10\n"
        "lgbm.rounds = 10\n"
        "cat.rounds = 10\n"
        "logreg.max_iter = 200\n"
        "svm_linear.max_iter = 300\n"
        "svm_poly.max_iter = 300\n"
        "svm_rbf.max_iter = 300\n"));
    return configs;
}

Dataset fixture(std::size_t n, std::uint64_t seed) {
    GeneratorConfig cfg;
    cfg.n = n;
    cfg.seed = seed;
    return generate(cfg);
}

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name)
        : path((std::filesystem::temp_directory_path() / name).string()) {}
    ~TempFile() { std::remove(path.c_str()); }
};

std::string read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

/// Rewrites one body byte of an archive, fixing the CRC so integrity
/// checking passes and the mutated field itself is exercised.
void tamper_archive(const std::string& path, std::size_t offset, char mask) {
    std::string bytes = read_bytes(path);
    std::string body = bytes.substr(0, bytes.size() - 4);
    body[offset] = static_cast<char>(body[offset] ^ mask);
    const std::uint32_t crc = crc32(body);
    std::string tail(4, '\0');
    for (int b = 0; b < 4; ++b) tail[static_cast<std::size_t>(b)] = static_cast<char>((crc >> (8 * b)) & 0xFF);
    write_bytes(path, body + tail);
}

} // namespace

TEST_CASE("benchmark report ranks all eleven models ascending") {
    const Dataset d = fixture(150, 3);
    const BenchmarkReport report = run_benchmark(d, 42, 0.2, fast_configs());
    REQUIRE(report.ranking.size() == 11);
    std::set<std::string> names;
    for (std::size_t i = 0; i < report.ranking.size(); ++i) {
        names.insert(report.ranking[i].model);
        if (i > 0) {
            const auto& prev = report.ranking[i - 1];
            const auto& cur = report.ranking[i];
            CHECK((prev.accuracy < cur.accuracy ||
                   (prev.accuracy == cur.accuracy && prev.model < cur.model)));
        }
    }
    CHECK(names.size() == 11);
    CHECK(report.best_model == report.ranking.back().model);
    CHECK(report.dataset_size == 150);
    CHECK(report.split_seed == 42);
}

TEST_CASE("benchmark rendering is byte-identical across runs") {
    const Dataset d = fixture(150, 4);
    const ModelConfigSet configs = fast_configs();
    const BenchmarkReport a = run_benchmark(d, 7, 0.2, configs);
    const BenchmarkReport b = run_benchmark(d, 7, 0.2, configs);
    CHECK(render_report(a, ReportFormat::text) == render_report(b, ReportFormat::text));
    CHECK(render_report(a, ReportFormat::json) == render_report(b, ReportFormat::json));
}

TEST_CASE("renderings carry the reference matrix values") {
    BenchmarkReport report;
    report.ranking = {{"CAT", 195.0 / 210.0}};
    report.best_model = "CAT";
    report.best_confusion = ConfusionMatrix(3);
    report.best_confusion.at(0, 0) = 76;
    report.best_confusion.at(1, 1) = 72;
    report.best_confusion.at(2, 2) = 47;
    report.best_confusion.at(2, 0) = 15;
    report.best_metrics = evaluate(report.best_confusion);
    report.dataset_size = 1050;
    report.split_seed = 42;

    const std::string text = render_report(report, ReportFormat::text);
    CHECK(text.find("Healthy") != std::string::npos);
    CHECK(text.find("Broken") != std::string::npos);
    CHECK(text.find("Needs-PM") != std::string::npos);
    CHECK(text.find("76") != std::string::npos);
    CHECK(text.find("47") != std::string::npos);
    CHECK(text.find("15") != std::string::npos);
    CHECK(text.find("accuracy = 92.86") != std::string::npos);

    const std::string json_text = render_report(report, ReportFormat::json);
    CHECK(json_text.find("92.86") != std::string::npos);
    CHECK(json_text.find("94.51") != std::string::npos);

    BenchmarkReport empty;
    CHECK_THROWS_AS(render_report(empty, ReportFormat::text), DataError);
}

TEST_CASE("models round-trip through archives with identical predictions") {
    const Dataset train = fixture(150, 5);
    const Matrix x = encode(train);
    const std::vector<int> y = train.label_indices();
    const Matrix probes = encode(fixture(100, 6));
    const ModelConfigSet configs = fast_configs();

    for (const std::string& name : ModelConfigSet::model_names()) {
        auto model = configs.make(name);
        model->fit(x, y);

        TempFile file("motordiag_roundtrip_" + name + ".model");
        save_model(*model, name, file.path);
        const LoadedModel loaded = load_model(file.path);
        CHECK(loaded.config_name == name);
        for (std::size_t i = 0; i < probes.rows(); ++i) {
            CHECK(model->predict_proba(probes.row(i)) ==
                  loaded.model->predict_proba(probes.row(i)));
        }
    }
}

TEST_CASE("archives reject tampering, truncation and version skew") {
    const Dataset train = fixture(80, 8);
    ModelConfigSet configs = fast_configs();
    auto model = configs.make("NB");
    model->fit(encode(train), train.label_indices());

    TempFile file("motordiag_archive_checks.model");
    save_model(*model, "NB", file.path);
    const std::string original = read_bytes(file.path);

    // truncated by one byte: integrity error, not a crash
    write_bytes(file.path, original.substr(0, original.size() - 1));
    CHECK_THROWS_AS(load_model(file.path), ArchiveError);

    // flipped payload byte: checksum mismatch
    std::string corrupt = original;
    corrupt[original.size() / 2] ^= 0x5A;
    write_bytes(file.path, corrupt);
    CHECK_THROWS_AS(load_model(file.path), ArchiveError);

    // unknown format tag (CRC fixed up so the tag check itself fires)
    write_bytes(file.path, original);
    tamper_archive(file.path, 0, 'X');
    CHECK_THROWS_WITH_AS(load_model(file.path), doctest::Contains("format tag"), ArchiveError);

    // unsupported version
    write_bytes(file.path, original);
    tamper_archive(file.path, 4, 9);
    CHECK_THROWS_WITH_AS(load_model(file.path), doctest::Contains("version"), ArchiveError);

    // schema mismatch names both hashes (schema u64 sits after magic+version+name)
    write_bytes(file.path, original);
    tamper_archive(file.path, 4 + 4 + 8 + 2, '\x7F');
    CHECK_THROWS_WITH_AS(load_model(file.path), doctest::Contains("schema"), ArchiveError);
}

TEST_CASE("diagnose classifies the schema exemplar rows") {
    const Dataset train = fixture(400, 9);
    ModelConfigSet configs = fast_configs();
    auto model = configs.make("RF");
    model->fit(encode(train), train.label_indices());

    const MotorReading healthy = parse_csv_row("44,280,280,280,1.4,1.4,1.4,Normal,H");
    const MotorReading broken = parse_csv_row("39,0,0,0,of,1.4,1.4,Normal,B");
    const MotorReading hot_pm = parse_csv_row("100,280,280,280,1.4,1.4,1.4,ABN,PM");
    CHECK(diagnose(*model, healthy).label == ConditionLabel::H);
    CHECK(diagnose(*model, broken).label == ConditionLabel::B);
    CHECK(diagnose(*model, hot_pm).label == ConditionLabel::PM);

    // a reading without a label is accepted
    MotorReading unlabeled = healthy;
    unlabeled.label.reset();
    CHECK(diagnose(*model, unlabeled).label == ConditionLabel::H);

    const std::string text = render_diagnosis(diagnose(*model, broken), ReportFormat::text);
    CHECK(text.find("label: B") != std::string::npos);
}

TEST_CASE("config files override defaults and reject unknown keys") {
    ModelConfigSet configs = ModelConfigSet::defaults();
    CHECK(configs.cat.rounds == 70);
    CHECK(configs.cat.learning_rate == 0.01);
    CHECK(configs.cat.depth == 6);
    CHECK(configs.lgbm.min_data_in_leaf == 10);
    CHECK(configs.lgbm.min_split_gain == 0.01);
    CHECK(configs.rf.n_estimators == 200);
    CHECK(configs.rf.seed == 42);
    CHECK(configs.svm_poly.degree == 5);
    CHECK(configs.svm_poly.coef0 == 0.75);
    CHECK(configs.svm_sigmoid.c == 0.75);
    CHECK(configs.svm_sigmoid.gamma == 0.001);
    CHECK(configs.svm_sigmoid.max_iter == 45);
    CHECK(configs.svm_rbf.gamma == 0.1);
    CHECK(configs.knn.k == 5);
    CHECK(configs.logreg.max_iter == 1000);
    CHECK(configs.logreg.seed == 42);
    CHECK(configs.xgb.seed == 42);

    configs.apply(KeyValueConfig::parse("cat.rounds = 5 # comment\nknn.k = 3\n"));
    CHECK(configs.cat.rounds == 5);
    CHECK(configs.knn.k == 3);
    CHECK(configs.cat.depth == 6); // untouched

    CHECK_THROWS_AS(configs.apply(KeyValueConfig::parse("cat.typo = 1\n")), ParseError);
    CHECK_THROWS_AS(KeyValueConfig::parse("not a key value line\n"), ParseError);
}

TEST_CASE("benchmark rejects unusable datasets") {
    const Dataset tiny = fixture(30, 10);
    CHECK_THROWS_AS(run_benchmark(tiny, 1, 0.2, fast_configs()), DataError);

    Dataset unlabeled = fixture(100, 11);
    for (MotorReading& r : unlabeled.readings) r.label.reset();
    CHECK_THROWS_AS(run_benchmark(unlabeled, 1, 0.2, fast_configs()), DataError);
}
