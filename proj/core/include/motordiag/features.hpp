#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "motordiag/dataset.hpp"

namespace motordiag {

/// Fixed 11-channel feature layout shared by every model:
/// [TEP, CI1, CI2, CI3, CR1, CR2, CR3, OPEN1, OPEN2, OPEN3, SOUND].
/// An open-circuit winding encodes as CR channel 0.0 plus OPEN flag 1.
namespace feat {
inline constexpr std::size_t kTep = 0;
inline constexpr std::size_t kCi = 1;   // 1..3
inline constexpr std::size_t kCr = 4;   // 4..6
inline constexpr std::size_t kOpen = 7; // 7..9
inline constexpr std::size_t kSound = 10;
inline constexpr std::size_t kCount = 11;

/// Version tag for the encoding; hashed into model archives so stale
/// models are refused instead of silently mispredicting.
inline constexpr const char* kSchemaId =
    "TEP,CI1,CI2,CI3,CR1,CR2,CR3,OPEN1,OPEN2,OPEN3,SOUND|v1";
} // namespace feat

using FeatureVector = std::array<double, feat::kCount>;

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

FeatureVector encode(const MotorReading& reading);
Matrix encode(const Dataset& dataset);

/// Stratified split: per-class test counts come from round(n * fraction)
/// distributed by largest remainder over class quotas, the shuffle inside
/// each class is seed-deterministic, and train/test partition the input.
struct SplitResult {
    Dataset train;
    Dataset test;
};
SplitResult stratified_split(const Dataset& dataset, double test_fraction, std::uint64_t seed);

/// Per-channel z-score parameters fitted on training data only. The stored
/// deviation is floored at 1e-12; a channel that is constant in training
/// maps to exactly 0.
struct ScalerParams {
    std::array<double, feat::kCount> mean{};
    std::array<double, feat::kCount> std{};

    bool operator==(const ScalerParams&) const = default;
};

ScalerParams fit_scaler(const Matrix& train);
Matrix apply_scaler(const ScalerParams& params, const Matrix& m);
FeatureVector apply_scaler(const ScalerParams& params, std::span<const double> x);

/// Largest-remainder apportionment: nonnegative integer counts summing to
/// `target` with |count_i - quota_i| < 1. Remainder ties go to the lower index.
std::vector<long long> largest_remainder_counts(std::span<const double> quotas, long long target);

} // namespace motordiag
