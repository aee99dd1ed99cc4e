#include "motordiag/model_config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace motordiag {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

} // namespace

KeyValueConfig KeyValueConfig::parse(const std::string& text) {
    KeyValueConfig config;
    std::istringstream in(text);
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParseError("config line " + std::to_string(row) + ": expected key = value",
                             row);
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw ParseError("config line " + std::to_string(row) + ": empty key or value", row);
        }
        config.values_[key] = value;
    }
    return config;
}

KeyValueConfig KeyValueConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse(text.str());
}

double KeyValueConfig::number(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    double v = 0.0;
    const char* first = it->second.data();
    const char* last = first + it->second.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) {
        throw ParseError("config key '" + key + "': malformed number '" + it->second + "'");
    }
    return v;
}

long long KeyValueConfig::integer(const std::string& key, long long fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    long long v = 0;
    const char* first = it->second.data();
    const char* last = first + it->second.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) {
        throw ParseError("config key '" + key + "': malformed integer '" + it->second + "'");
    }
    return v;
}

ModelConfigSet ModelConfigSet::defaults() {
    ModelConfigSet set;
    set.nb = {.bins = 8, .alpha = 1.0};
    set.svm_linear = {.kind = KernelKind::linear, .c = 1.0, .max_iter = 1000};
    set.svm_poly = {.kind = KernelKind::polynomial,
                    .degree = 5,
                    .coef0 = 0.75,
                    .c = 1.0,
                    .max_iter = 1000,
                    .gamma_scale = true};
    set.svm_sigmoid = {.kind = KernelKind::sigmoid,
                       .gamma = 0.001,
                       .coef0 = 0.0,
                       .c = 0.75,
                       .max_iter = 45};
    set.svm_rbf = {.kind = KernelKind::rbf, .gamma = 0.1, .c = 0.75, .max_iter = 1000};
    set.logreg = {.max_iter = 1000, .lambda = 1e-4, .grad_tol = 1e-6, .seed = 42};
    set.knn = {.k = 5};
    set.rf = {.n_estimators = 200,
              .seed = 42,
              .tree = {.max_depth = -1, .min_samples_leaf = 1, .m_try = 4}};
    set.xgb = {.rounds = 100,
               .learning_rate = 0.3,
               .lambda = 1.0,
               .gamma = 0.0,
               .max_depth = 6,
               .seed = 42};
    set.lgbm = {.rounds = 100,
                .learning_rate = 0.1,
                .max_leaves = 31,
                .min_data_in_leaf = 10,
                .min_split_gain = 0.01,
                .max_bins = 255};
    set.cat = {.rounds = 70,
               .learning_rate = 0.01,
               .depth = 6,
               .n_permutations = 4,
               .seed = 42};
    return set;
}

const std::vector<std::string>& ModelConfigSet::model_names() {
    static const std::vector<std::string> names = {
        "NB",  "SVM-Linear", "SVM-Poly", "SVM-Sigmoid", "SVM-RBF", "LogReg",
        "KNN", "RF",         "XGB",      "LGBM",        "CAT"};
    return names;
}

void ModelConfigSet::apply(const KeyValueConfig& config) {
    static const std::vector<std::string> known = {
        "nb.bins",          "nb.alpha",
        "svm_linear.c",     "svm_linear.max_iter",
        "svm_poly.degree",  "svm_poly.coef0",        "svm_poly.c",    "svm_poly.max_iter",
        "svm_sigmoid.c",    "svm_sigmoid.gamma",     "svm_sigmoid.coef0",
        "svm_sigmoid.max_iter",
        "svm_rbf.c",        "svm_rbf.gamma",         "svm_rbf.max_iter",
        "logreg.max_iter",  "logreg.lambda",         "logreg.seed",
        "knn.k",
        "rf.n_estimators",  "rf.seed",               "rf.m_try",
        "xgb.rounds",       "xgb.learning_rate",     "xgb.lambda",    "xgb.gamma",
        "xgb.max_depth",    "xgb.seed",
        "lgbm.rounds",      "lgbm.learning_rate",    "lgbm.max_leaves",
        "lgbm.min_data_in_leaf", "lgbm.min_split_gain", "lgbm.max_bins",
        "cat.rounds",       "cat.learning_rate",     "cat.depth",
        "cat.n_permutations", "cat.seed"};
    for (const auto& [key, value] : config.values()) {
        bool ok = false;
        for (const auto& k : known) {
            if (k == key) {
                ok = true;
                break;
            }
        }
        if (!ok) throw ParseError("unknown config key '" + key + "'");
    }

    nb.bins = static_cast<std::size_t>(config.integer("nb.bins", static_cast<long long>(nb.bins)));
    nb.alpha = config.number("nb.alpha", nb.alpha);

    svm_linear.c = config.number("svm_linear.c", svm_linear.c);
    svm_linear.max_iter = static_cast<int>(config.integer("svm_linear.max_iter", svm_linear.max_iter));

    svm_poly.degree = static_cast<int>(config.integer("svm_poly.degree", svm_poly.degree));
    svm_poly.coef0 = config.number("svm_poly.coef0", svm_poly.coef0);
    svm_poly.c = config.number("svm_poly.c", svm_poly.c);
    svm_poly.max_iter = static_cast<int>(config.integer("svm_poly.max_iter", svm_poly.max_iter));

    svm_sigmoid.c = config.number("svm_sigmoid.c", svm_sigmoid.c);
    svm_sigmoid.gamma = config.number("svm_sigmoid.gamma", svm_sigmoid.gamma);
    svm_sigmoid.coef0 = config.number("svm_sigmoid.coef0", svm_sigmoid.coef0);
    svm_sigmoid.max_iter =
        static_cast<int>(config.integer("svm_sigmoid.max_iter", svm_sigmoid.max_iter));

    svm_rbf.c = config.number("svm_rbf.c", svm_rbf.c);
    svm_rbf.gamma = config.number("svm_rbf.gamma", svm_rbf.gamma);
    svm_rbf.max_iter = static_cast<int>(config.integer("svm_rbf.max_iter", svm_rbf.max_iter));

    logreg.max_iter = static_cast<std::size_t>(
        config.integer("logreg.max_iter", static_cast<long long>(logreg.max_iter)));
    logreg.lambda = config.number("logreg.lambda", logreg.lambda);
    logreg.seed = static_cast<std::uint64_t>(
        config.integer("logreg.seed", static_cast<long long>(logreg.seed)));

    knn.k = static_cast<std::size_t>(config.integer("knn.k", static_cast<long long>(knn.k)));

    rf.n_estimators = static_cast<int>(config.integer("rf.n_estimators", rf.n_estimators));
    rf.seed = static_cast<std::uint64_t>(config.integer("rf.seed", static_cast<long long>(rf.seed)));
    rf.tree.m_try = static_cast<int>(config.integer("rf.m_try", rf.tree.m_try));

    xgb.rounds = static_cast<int>(config.integer("xgb.rounds", xgb.rounds));
    xgb.learning_rate = config.number("xgb.learning_rate", xgb.learning_rate);
    xgb.lambda = config.number("xgb.lambda", xgb.lambda);
    xgb.gamma = config.number("xgb.gamma", xgb.gamma);
    xgb.max_depth = static_cast<int>(config.integer("xgb.max_depth", xgb.max_depth));
    xgb.seed = static_cast<std::uint64_t>(config.integer("xgb.seed", static_cast<long long>(xgb.seed)));

    lgbm.rounds = static_cast<int>(config.integer("lgbm.rounds", lgbm.rounds));
    lgbm.learning_rate = config.number("lgbm.learning_rate", lgbm.learning_rate);
    lgbm.max_leaves = static_cast<int>(config.integer("lgbm.max_leaves", lgbm.max_leaves));
    lgbm.min_data_in_leaf =
        static_cast<int>(config.integer("lgbm.min_data_in_leaf", lgbm.min_data_in_leaf));
    lgbm.min_split_gain = config.number("lgbm.min_split_gain", lgbm.min_split_gain);
    lgbm.max_bins = static_cast<std::size_t>(
        config.integer("lgbm.max_bins", static_cast<long long>(lgbm.max_bins)));

    cat.rounds = static_cast<int>(config.integer("cat.rounds", cat.rounds));
    cat.learning_rate = config.number("cat.learning_rate", cat.learning_rate);
    cat.depth = static_cast<int>(config.integer("cat.depth", cat.depth));
    cat.n_permutations =
        static_cast<int>(config.integer("cat.n_permutations", cat.n_permutations));
    cat.seed = static_cast<std::uint64_t>(config.integer("cat.seed", static_cast<long long>(cat.seed)));
}

std::unique_ptr<Classifier> ModelConfigSet::make(const std::string& name) const {
    if (name == "NB") return std::make_unique<NaiveBayesClassifier>(nb);
    if (name == "SVM-Linear") return std::make_unique<SvmClassifier>(svm_linear);
    if (name == "SVM-Poly") return std::make_unique<SvmClassifier>(svm_poly);
    if (name == "SVM-Sigmoid") return std::make_unique<SvmClassifier>(svm_sigmoid);
    if (name == "SVM-RBF") return std::make_unique<SvmClassifier>(svm_rbf);
    if (name == "LogReg") return std::make_unique<LogRegClassifier>(logreg);
    if (name == "KNN") return std::make_unique<KnnClassifier>(knn);
    if (name == "RF") return std::make_unique<ForestClassifier>(rf);
    if (name == "XGB") return std::make_unique<XgbClassifier>(xgb);
    if (name == "LGBM") return std::make_unique<LgbmClassifier>(lgbm);
    if (name == "CAT") return std::make_unique<CatClassifier>(cat);
    throw ModelError("unknown model name '" + name + "'");
}

} // namespace motordiag
