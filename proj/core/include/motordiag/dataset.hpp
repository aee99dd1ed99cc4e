#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "motordiag/error.hpp"

namespace motordiag {

/// Motor condition classes with fixed indices used everywhere in the toolkit.
enum class ConditionLabel : int { H = 0, B = 1, PM = 2 };

inline constexpr int kNumClasses = 3;

constexpr int label_index(ConditionLabel label) { return static_cast<int>(label); }
ConditionLabel label_from_index(int index);
const char* label_token(ConditionLabel label); // "H" / "B" / "PM"
const char* label_display_name(ConditionLabel label); // "Healthy" / "Broken" / "Needs-PM"
std::optional<ConditionLabel> parse_label_token(const std::string& token);

enum class Sound : int { normal = 0, abnormal = 1 };

/// One winding resistance reading: a positive Ohm value or an open circuit
/// (the "of" sentinel in the CSV format).
struct Resistance {
    bool open = false;
    double ohms = 0.0; // meaningful only when !open

    static Resistance open_circuit() { return {true, 0.0}; }
    static Resistance value(double ohms) { return {false, ohms}; }

    bool operator==(const Resistance&) const = default;
};

/// One dataset row: temperature, three phase currents, three winding
/// resistances, sound condition and an optional condition label.
struct MotorReading {
    double tep = 0.0;
    std::array<double, 3> ci{};
    std::array<Resistance, 3> cr{};
    Sound sound = Sound::normal;
    std::optional<ConditionLabel> label;

    bool operator==(const MotorReading&) const = default;
};

/// Throws DataError if the reading violates a schema invariant
/// (non-finite values, negative current, non-positive resistance).
void validate(const MotorReading& reading);

/// Ordered collection of readings. Label presence must be uniform:
/// either every reading is labeled or none is.
struct Dataset {
    std::vector<MotorReading> readings;

    std::size_t size() const { return readings.size(); }
    bool empty() const { return readings.empty(); }

    /// True when all readings carry a label. Throws DataError on mixed
    /// label presence or when called on an empty dataset.
    bool labeled() const;

    /// Class indices of every reading. Requires labeled().
    std::vector<int> label_indices() const;

    /// Per-class reading counts. Requires labeled().
    std::array<std::size_t, 3> class_counts() const;
};

/// Parses the CSV format: header `TEP,CI-T1,CI-T2,CI-T3,CR1,CR2,CR3,SOUND,Label`
/// (the Label column may be absent), resistances are decimals or the literal
/// `of` (case-insensitive), sound is `Normal` or `ABN`. Malformed content
/// raises ParseError naming the 1-based data row and column.
Dataset parse_csv(std::istream& in);
Dataset parse_csv_text(const std::string& text);
Dataset load_csv_file(const std::string& path);

/// Inverse of parse_csv. Numbers are written with shortest round-trip
/// precision, so parse(serialize(d)) reproduces d exactly.
void serialize_csv(const Dataset& dataset, std::ostream& out);
std::string serialize_csv_text(const Dataset& dataset);
void save_csv_file(const Dataset& dataset, const std::string& path);

/// Parses a single data row (no header) into a reading; convenience for the
/// CLI `diagnose --row` path. Accepts 8 or 9 columns.
MotorReading parse_csv_row(const std::string& row);

} // namespace motordiag
