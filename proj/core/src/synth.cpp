#include "motordiag/synth.hpp"

#include <algorithm>
#include <cmath>

#include "motordiag/features.hpp"
#include "motordiag/rng.hpp"

namespace motordiag {

namespace {

double clipped_normal(Rng& rng, double mean, double sd, double lo) {
    return std::max(rng.normal(mean, sd), lo);
}

void fill_healthy_electrics(MotorReading& r, Rng& rng) {
    for (std::size_t k = 0; k < 3; ++k) {
        r.ci[k] = clipped_normal(rng, 280.0, 8.0, 0.0);
        r.cr[k] = Resistance::value(clipped_normal(rng, 1.4, 0.05, 1e-3));
    }
}

MotorReading make_healthy(Rng& rng) {
    MotorReading r;
    r.tep = rng.uniform(38.0, 70.0);
    fill_healthy_electrics(r, rng);
    r.sound = Sound::normal;
    r.label = ConditionLabel::H;
    return r;
}

MotorReading make_broken(Rng& rng) {
    MotorReading r;
    r.tep = rng.uniform(30.0, 110.0);
    // A broken motor never conducts normally: the current triple collapses.
    // Winding faults (open circuit or runaway resistance) appear on top of
    // that, matching field reports where an open coil stalls all phases.
    for (std::size_t k = 0; k < 3; ++k) {
        r.ci[k] = rng.uniform(0.0, 0.8);
        r.cr[k] = Resistance::value(clipped_normal(rng, 1.4, 0.05, 1e-3));
    }
    if (rng.uniform() < 0.6) {
        const double u = rng.uniform();
        const int faults = u < 0.7 ? 1 : (u < 0.9 ? 2 : 3);
        std::vector<std::size_t> windings = {0, 1, 2};
        shuffle(windings, rng);
        for (int f = 0; f < faults; ++f) {
            const std::size_t k = windings[static_cast<std::size_t>(f)];
            if (rng.uniform() < 0.5) {
                r.cr[k] = Resistance::open_circuit();
            } else {
                r.cr[k] = Resistance::value(rng.uniform(150.0, 900.0));
            }
        }
    }
    r.sound = (rng.uniform() < 0.3) ? Sound::abnormal : Sound::normal;
    r.label = ConditionLabel::B;
    return r;
}

MotorReading make_needs_pm(Rng& rng) {
    MotorReading r;
    fill_healthy_electrics(r, rng);
    const double u = rng.uniform();
    if (u < 0.4) { // running hot
        r.tep = rng.uniform(85.0, 115.0);
        r.sound = Sound::normal;
    } else if (u < 0.8) { // abnormal sound only
        r.tep = rng.uniform(38.0, 70.0);
        r.sound = Sound::abnormal;
    } else { // both
        r.tep = rng.uniform(85.0, 115.0);
        r.sound = Sound::abnormal;
    }
    r.label = ConditionLabel::PM;
    return r;
}

} // namespace

void GeneratorConfig::validate() const {
    if (n < 1) throw DataError("generator n must be >= 1");
    double sum = 0.0;
    for (double m : class_mix) {
        if (m < 0.0) throw DataError("class_mix entries must be nonnegative");
        sum += m;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw DataError("class_mix must sum to 1");
    if (!(label_noise >= 0.0 && label_noise < 0.5)) {
        throw DataError("label_noise must be in [0, 0.5)");
    }
}

Dataset generate(const GeneratorConfig& cfg) {
    cfg.validate();
    Rng rng(mix_seed(cfg.seed, 0x73796E7468ULL)); // "synth" stream

    std::array<double, 3> quotas;
    for (std::size_t c = 0; c < 3; ++c) {
        quotas[c] = static_cast<double>(cfg.n) * cfg.class_mix[c];
    }
    const auto counts = largest_remainder_counts(quotas, static_cast<long long>(cfg.n));

    std::vector<ConditionLabel> plan;
    plan.reserve(cfg.n);
    for (std::size_t c = 0; c < 3; ++c) {
        plan.insert(plan.end(), static_cast<std::size_t>(counts[c]), label_from_index(int(c)));
    }
    shuffle(plan, rng);

    Dataset dataset;
    dataset.readings.reserve(cfg.n);
    for (ConditionLabel label : plan) {
        switch (label) {
            case ConditionLabel::H: dataset.readings.push_back(make_healthy(rng)); break;
            case ConditionLabel::B: dataset.readings.push_back(make_broken(rng)); break;
            case ConditionLabel::PM: dataset.readings.push_back(make_needs_pm(rng)); break;
        }
    }

    const auto flips = static_cast<std::size_t>(
        std::llround(cfg.label_noise * static_cast<double>(cfg.n)));
    if (flips > 0) {
        std::vector<std::size_t> order(cfg.n);
        for (std::size_t i = 0; i < cfg.n; ++i) order[i] = i;
        shuffle(order, rng);
        for (std::size_t f = 0; f < flips; ++f) {
            MotorReading& r = dataset.readings[order[f]];
            const int old_idx = label_index(*r.label);
            const int new_idx = (old_idx + 1 + static_cast<int>(rng.below(2))) % 3;
            r.label = label_from_index(new_idx);
        }
    }
    return dataset;
}

} // namespace motordiag
