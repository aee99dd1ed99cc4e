#pragma once

#include <array>
#include <cstdint>

#include "motordiag/dataset.hpp"

namespace motordiag {

/// Configuration for the synthetic dataset generator. The generator stands in
/// for confidential maintenance records: distributions are anchored to the
/// schema's exemplar values (280 A phases, 1.4 Ohm windings, 38-115 degC) and
/// are documented as synthetic.
struct GeneratorConfig {
    std::size_t n = 1050;
    std::uint64_t seed = 42;
    std::array<double, 3> class_mix = {0.36, 0.34, 0.30}; // H, B, PM
    double label_noise = 0.0; // fraction of labels replaced by a random other label

    void validate() const;
};

/// Deterministic labeled dataset for `cfg`. With label_noise = 0:
///  - H rows have intact electrics, Normal sound and tep in [38,70);
///  - B rows always have a collapsed current triple (all phases < 1 A) and may
///    additionally have open-circuit or >100 Ohm windings;
///  - PM rows have intact electrics and high temperature, abnormal sound, or both.
Dataset generate(const GeneratorConfig& cfg);

} // namespace motordiag
