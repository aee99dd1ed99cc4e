#include "motordiag/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace motordiag {

namespace {

const std::array<std::string, 9> kColumns = {
    "TEP", "CI-T1", "CI-T2", "CI-T3", "CR1", "CR2", "CR3", "SOUND", "Label"};

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(trim(field));
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

bool is_open_token(const std::string& token) {
    if (token.size() != 2) return false;
    return std::tolower(static_cast<unsigned char>(token[0])) == 'o' &&
           std::tolower(static_cast<unsigned char>(token[1])) == 'f';
}

double parse_number(const std::string& token, std::size_t row, const std::string& column) {
    double value = 0.0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || !std::isfinite(value)) {
        throw ParseError("row " + std::to_string(row) + ", column " + column +
                             ": malformed number '" + token + "'",
                         row, column);
    }
    return value;
}

void append_number(std::string& out, double value) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    out.append(buf, ptr);
}

MotorReading parse_row_fields(const std::vector<std::string>& fields, std::size_t row,
                              bool expect_label) {
    MotorReading reading;
    reading.tep = parse_number(fields[0], row, kColumns[0]);
    for (int k = 0; k < 3; ++k) {
        const double v = parse_number(fields[1 + k], row, kColumns[1 + k]);
        if (v < 0.0) {
            throw ParseError("row " + std::to_string(row) + ", column " + kColumns[1 + k] +
                                 ": current must be >= 0",
                             row, kColumns[1 + k]);
        }
        reading.ci[static_cast<std::size_t>(k)] = v;
    }
    for (int k = 0; k < 3; ++k) {
        const std::string& token = fields[4 + k];
        if (is_open_token(token)) {
            reading.cr[static_cast<std::size_t>(k)] = Resistance::open_circuit();
        } else {
            const double v = parse_number(token, row, kColumns[4 + k]);
            if (v <= 0.0) {
                throw ParseError("row " + std::to_string(row) + ", column " + kColumns[4 + k] +
                                     ": resistance must be > 0",
                                 row, kColumns[4 + k]);
            }
            reading.cr[static_cast<std::size_t>(k)] = Resistance::value(v);
        }
    }
    const std::string& sound = fields[7];
    if (sound == "Normal") {
        reading.sound = Sound::normal;
    } else if (sound == "ABN") {
        reading.sound = Sound::abnormal;
    } else {
        throw ParseError("row " + std::to_string(row) + ", column SOUND: unknown token '" +
                             sound + "'",
                         row, "SOUND");
    }
    if (expect_label) {
        const std::string& token = fields[8];
        if (!token.empty()) {
            auto label = parse_label_token(token);
            if (!label) {
                throw ParseError("row " + std::to_string(row) +
                                     ", column Label: unknown token '" + token + "'",
                                 row, "Label");
            }
            reading.label = *label;
        }
    }
    return reading;
}

} // namespace

ConditionLabel label_from_index(int index) {
    if (index < 0 || index >= kNumClasses) throw DataError("class index out of range");
    return static_cast<ConditionLabel>(index);
}

const char* label_token(ConditionLabel label) {
    switch (label) {
        case ConditionLabel::H: return "H";
        case ConditionLabel::B: return "B";
        case ConditionLabel::PM: return "PM";
    }
    return "?";
}

const char* label_display_name(ConditionLabel label) {
    switch (label) {
        case ConditionLabel::H: return "Healthy";
        case ConditionLabel::B: return "Broken";
        case ConditionLabel::PM: return "Needs-PM";
    }
    return "?";
}

std::optional<ConditionLabel> parse_label_token(const std::string& token) {
    if (token == "H") return ConditionLabel::H;
    if (token == "B") return ConditionLabel::B;
    if (token == "PM") return ConditionLabel::PM;
    return std::nullopt;
}

void validate(const MotorReading& reading) {
    if (!std::isfinite(reading.tep)) throw DataError("TEP must be finite");
    for (double v : reading.ci) {
        if (!std::isfinite(v) || v < 0.0) throw DataError("CI values must be finite and >= 0");
    }
    for (const Resistance& r : reading.cr) {
        if (!r.open && (!std::isfinite(r.ohms) || r.ohms <= 0.0)) {
            throw DataError("CR values must be finite and > 0");
        }
    }
}

bool Dataset::labeled() const {
    if (readings.empty()) throw DataError("empty dataset");
    const bool first = readings.front().label.has_value();
    for (const MotorReading& r : readings) {
        if (r.label.has_value() != first) throw DataError("mixed label presence in dataset");
    }
    return first;
}

std::vector<int> Dataset::label_indices() const {
    if (!labeled()) throw DataError("dataset is unlabeled");
    std::vector<int> out;
    out.reserve(readings.size());
    for (const MotorReading& r : readings) out.push_back(label_index(*r.label));
    return out;
}

std::array<std::size_t, 3> Dataset::class_counts() const {
    std::array<std::size_t, 3> counts{};
    for (int idx : label_indices()) ++counts[static_cast<std::size_t>(idx)];
    return counts;
}

Dataset parse_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("missing header row");
    auto header = split_fields(line);
    bool has_label = false;
    if (header.size() == 9) {
        has_label = true;
    } else if (header.size() != 8) {
        throw ParseError("header must have 8 or 9 columns, got " +
                         std::to_string(header.size()));
    }
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] != kColumns[i]) {
            throw ParseError("header column " + std::to_string(i + 1) + " must be '" +
                             kColumns[i] + "', got '" + header[i] + "'");
        }
    }

    Dataset dataset;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ++row;
        auto fields = split_fields(line);
        if (fields.size() != header.size()) {
            throw ParseError("row " + std::to_string(row) + ": expected " +
                                 std::to_string(header.size()) + " columns, got " +
                                 std::to_string(fields.size()),
                             row);
        }
        dataset.readings.push_back(parse_row_fields(fields, row, has_label));
    }
    if (!dataset.readings.empty()) dataset.labeled(); // enforce uniform label presence
    return dataset;
}

Dataset parse_csv_text(const std::string& text) {
    std::istringstream in(text);
    return parse_csv(in);
}

Dataset load_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    return parse_csv(in);
}

void serialize_csv(const Dataset& dataset, std::ostream& out) {
    const bool with_label = !dataset.readings.empty() && dataset.labeled();
    std::string text;
    for (std::size_t i = 0; i < (with_label ? 9u : 8u); ++i) {
        if (i) text += ',';
        text += kColumns[i];
    }
    text += '\n';
    for (const MotorReading& r : dataset.readings) {
        append_number(text, r.tep);
        for (double v : r.ci) {
            text += ',';
            append_number(text, v);
        }
        for (const Resistance& cr : r.cr) {
            text += ',';
            if (cr.open) {
                text += "of";
            } else {
                append_number(text, cr.ohms);
            }
        }
        text += ',';
        text += (r.sound == Sound::normal) ? "Normal" : "ABN";
        if (with_label) {
            text += ',';
            text += label_token(*r.label);
        }
        text += '\n';
    }
    out << text;
}

std::string serialize_csv_text(const Dataset& dataset) {
    std::ostringstream out;
    serialize_csv(dataset, out);
    return out.str();
}

void save_csv_file(const Dataset& dataset, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    serialize_csv(dataset, out);
}

MotorReading parse_csv_row(const std::string& row) {
    auto fields = split_fields(row);
    if (fields.size() != 8 && fields.size() != 9) {
        throw ParseError("row 1: expected 8 or 9 columns, got " +
                             std::to_string(fields.size()),
                         1);
    }
    return parse_row_fields(fields, 1, fields.size() == 9);
}

} // namespace motordiag
