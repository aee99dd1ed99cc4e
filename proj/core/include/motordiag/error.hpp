#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace motordiag {

/// Malformed input text (CSV rows, config files). Carries the offending
/// row number (1-based data row) and column name where known.
class ParseError : public std::runtime_error {
public:
    ParseError(std::string message, std::size_t row = 0, std::string column = {})
        : std::runtime_error(std::move(message)), row_(row), column_(std::move(column)) {}

    std::size_t row() const { return row_; }
    const std::string& column() const { return column_; }

private:
    std::size_t row_;
    std::string column_;
};

/// Structurally valid data that violates an operation precondition
/// (empty dataset, mismatched lengths, missing class, ...).
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& message) : std::runtime_error(message) {}
};

/// Failure while fitting, predicting or assembling a model.
class ModelError : public std::runtime_error {
public:
    explicit ModelError(const std::string& message) : std::runtime_error(message) {}
};

/// Corrupt, truncated or incompatible model archive.
class ArchiveError : public ModelError {
public:
    explicit ArchiveError(const std::string& message) : ModelError(message) {}
};

} // namespace motordiag
