#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "motordiag/error.hpp"
#include "motordiag/features.hpp"

namespace motordiag {

class Classifier;

/// Little-endian binary writer used for model payloads.
class BinaryWriter {
public:
    void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void i64(long long v) { u64(static_cast<std::uint64_t>(v)); }
    void f64(double v);
    void str(const std::string& s);
    void f64_vec(std::span<const double> values);
    void i64_vec(std::span<const long long> values);

    const std::string& bytes() const { return buf_; }

private:
    std::string buf_;
};

/// Bounds-checked reader for the same format; throws ArchiveError on
/// truncation instead of reading past the end.
class BinaryReader {
public:
    explicit BinaryReader(std::string bytes) : buf_(std::move(bytes)) {}

    std::uint8_t u8();
    std::uint32_t u32();
    std::uint64_t u64();
    long long i64() { return static_cast<long long>(u64()); }
    double f64();
    std::string str();
    std::vector<double> f64_vec();
    std::vector<long long> i64_vec();
    bool exhausted() const { return pos_ == buf_.size(); }

private:
    void need(std::size_t n);
    std::string buf_;
    std::size_t pos_ = 0;
};

std::uint32_t crc32(std::span<const char> bytes);
std::uint64_t schema_hash(); // FNV-1a of the feature layout id

/// Self-describing model file: magic, version, config name, schema hash,
/// length-prefixed payload and a trailing CRC32.
struct ModelArchive {
    std::string config_name;
    std::uint64_t schema = 0;
    std::string payload;
};

void save_model(const Classifier& model, const std::string& config_name, const std::string& path);
ModelArchive read_archive(const std::string& path);

struct LoadedModel {
    std::string config_name;
    std::unique_ptr<Classifier> model;
};

/// Reads an archive, verifies integrity and schema, and reconstructs the
/// model. Unknown kinds and schema mismatches raise ArchiveError naming the
/// stored and supported versions.
LoadedModel load_model(const std::string& path);

} // namespace motordiag
