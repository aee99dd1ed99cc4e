#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "motordiag/boosting.hpp"
#include "motordiag/forest.hpp"
#include "motordiag/knn.hpp"
#include "motordiag/logistic.hpp"
#include "motordiag/naive_bayes.hpp"
#include "motordiag/svm.hpp"

namespace motordiag {

/// Flat `key = value` configuration file ('#' starts a comment). Absent keys
/// keep their documented defaults; unknown keys are rejected.
class KeyValueConfig {
public:
    static KeyValueConfig parse(const std::string& text);
    static KeyValueConfig from_file(const std::string& path);

    bool has(const std::string& key) const { return values_.contains(key); }
    double number(const std::string& key, double fallback) const;
    long long integer(const std::string& key, long long fallback) const;

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

/// The eleven benchmark configurations with their fixed evaluation order.
struct ModelConfigSet {
    NaiveBayesParams nb;
    KernelSpec svm_linear;
    KernelSpec svm_poly;
    KernelSpec svm_sigmoid;
    KernelSpec svm_rbf;
    LogRegParams logreg;
    KnnParams knn;
    ForestParams rf;
    XgbParams xgb;
    LgbmParams lgbm;
    CatParams cat;

    static ModelConfigSet defaults();
    static const std::vector<std::string>& model_names();

    /// Applies config-file overrides; throws ParseError on unknown keys.
    void apply(const KeyValueConfig& config);

    std::unique_ptr<Classifier> make(const std::string& name) const;
};

} // namespace motordiag
