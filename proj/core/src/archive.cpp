#include "motordiag/archive.hpp"

#include <array>
#include <cstring>
#include <fstream>

#include "motordiag/boosting.hpp"
#include "motordiag/classifier.hpp"
#include "motordiag/forest.hpp"
#include "motordiag/knn.hpp"
#include "motordiag/logistic.hpp"
#include "motordiag/naive_bayes.hpp"
#include "motordiag/svm.hpp"

namespace motordiag {

namespace {

constexpr char kMagic[4] = {'M', 'D', 'A', 'R'};
constexpr std::uint32_t kVersion = 1;

std::unique_ptr<Classifier> make_by_kind(const std::string& kind) {
    if (kind == "naive-bayes") return std::make_unique<NaiveBayesClassifier>();
    if (kind == "logreg") return std::make_unique<LogRegClassifier>();
    if (kind == "knn") return std::make_unique<KnnClassifier>();
    if (kind == "svm") return std::make_unique<SvmClassifier>(KernelSpec{});
    if (kind == "random-forest") return std::make_unique<ForestClassifier>();
    if (kind == "boost-xgb") return std::make_unique<XgbClassifier>();
    if (kind == "boost-lgbm") return std::make_unique<LgbmClassifier>();
    if (kind == "boost-cat") return std::make_unique<CatClassifier>();
    throw ArchiveError("unknown model kind '" + kind + "'");
}

} // namespace

void BinaryWriter::u32(std::uint32_t v) {
    for (int b = 0; b < 4; ++b) buf_.push_back(static_cast<char>((v >> (8 * b)) & 0xFF));
}

void BinaryWriter::u64(std::uint64_t v) {
    for (int b = 0; b < 8; ++b) buf_.push_back(static_cast<char>((v >> (8 * b)) & 0xFF));
}

void BinaryWriter::f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    u64(bits);
}

void BinaryWriter::str(const std::string& s) {
    u64(s.size());
    buf_ += s;
}

void BinaryWriter::f64_vec(std::span<const double> values) {
    u64(values.size());
    for (double v : values) f64(v);
}

void BinaryWriter::i64_vec(std::span<const long long> values) {
    u64(values.size());
    for (long long v : values) i64(v);
}

void BinaryReader::need(std::size_t n) {
    if (pos_ + n > buf_.size()) throw ArchiveError("truncated archive");
}

std::uint8_t BinaryReader::u8() {
    need(1);
    return static_cast<std::uint8_t>(buf_[pos_++]);
}

std::uint32_t BinaryReader::u32() {
    need(4);
    std::uint32_t v = 0;
    for (int b = 0; b < 4; ++b) {
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf_[pos_++])) << (8 * b);
    }
    return v;
}

std::uint64_t BinaryReader::u64() {
    need(8);
    std::uint64_t v = 0;
    for (int b = 0; b < 8; ++b) {
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf_[pos_++])) << (8 * b);
    }
    return v;
}

double BinaryReader::f64() {
    const std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
}

std::string BinaryReader::str() {
    const std::uint64_t len = u64();
    need(len);
    std::string s = buf_.substr(pos_, len);
    pos_ += len;
    return s;
}

std::vector<double> BinaryReader::f64_vec() {
    const std::uint64_t len = u64();
    need(len * 8);
    std::vector<double> out(len);
    for (auto& v : out) v = f64();
    return out;
}

std::vector<long long> BinaryReader::i64_vec() {
    const std::uint64_t len = u64();
    need(len * 8);
    std::vector<long long> out(len);
    for (auto& v : out) v = i64();
    return out;
}

std::uint32_t crc32(std::span<const char> bytes) {
    static const auto table = [] {
        std::array<std::uint32_t, 256> t{};
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? (0xEDB88320u ^ (c >> 1)) : (c >> 1);
            t[i] = c;
        }
        return t;
    }();
    std::uint32_t crc = 0xFFFFFFFFu;
    for (char ch : bytes) {
        crc = table[(crc ^ static_cast<unsigned char>(ch)) & 0xFF] ^ (crc >> 8);
    }
    return crc ^ 0xFFFFFFFFu;
}

std::uint64_t schema_hash() {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char* p = feat::kSchemaId; *p; ++p) {
        h ^= static_cast<unsigned char>(*p);
        h *= 0x100000001b3ULL;
    }
    return h;
}

void save_model(const Classifier& model, const std::string& config_name,
                const std::string& path) {
    BinaryWriter payload;
    payload.str(model.model_kind());
    model.save(payload);

    BinaryWriter out;
    for (char c : kMagic) out.u8(static_cast<std::uint8_t>(c));
    out.u32(kVersion);
    out.str(config_name);
    out.u64(schema_hash());
    out.str(payload.bytes());

    const std::uint32_t crc = crc32(out.bytes());
    BinaryWriter trailer;
    trailer.u32(crc);

    std::ofstream file(path, std::ios::binary);
    if (!file) throw DataError("cannot write '" + path + "'");
    file.write(out.bytes().data(), static_cast<std::streamsize>(out.bytes().size()));
    file.write(trailer.bytes().data(), static_cast<std::streamsize>(trailer.bytes().size()));
}

ModelArchive read_archive(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw DataError("cannot open '" + path + "'");
    std::string bytes((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());

    if (bytes.size() < 4 + 4 + 8 + 8 + 8 + 4) throw ArchiveError("truncated archive");
    const std::string body = bytes.substr(0, bytes.size() - 4);
    BinaryReader tail(bytes.substr(bytes.size() - 4));
    if (tail.u32() != crc32(body)) throw ArchiveError("archive checksum mismatch");

    BinaryReader in(body);
    for (char expected : kMagic) {
        if (static_cast<char>(in.u8()) != expected) {
            throw ArchiveError("unknown archive format tag");
        }
    }
    const std::uint32_t version = in.u32();
    if (version != kVersion) {
        throw ArchiveError("unsupported archive version " + std::to_string(version) +
                           " (supported: " + std::to_string(kVersion) + ")");
    }
    ModelArchive archive;
    archive.config_name = in.str();
    archive.schema = in.u64();
    archive.payload = in.str();
    if (!in.exhausted()) throw ArchiveError("trailing bytes after payload");
    return archive;
}

LoadedModel load_model(const std::string& path) {
    ModelArchive archive = read_archive(path);
    if (archive.schema != schema_hash()) {
        char stored[32], current[32];
        std::snprintf(stored, sizeof(stored), "%016llx",
                      static_cast<unsigned long long>(archive.schema));
        std::snprintf(current, sizeof(current), "%016llx",
                      static_cast<unsigned long long>(schema_hash()));
        throw ArchiveError(std::string("archive schema ") + stored +
                           " does not match encoder schema " + current);
    }
    BinaryReader payload(std::move(archive.payload));
    const std::string kind = payload.str();
    LoadedModel loaded;
    loaded.config_name = archive.config_name;
    loaded.model = make_by_kind(kind);
    loaded.model->load(payload);
    return loaded;
}

} // namespace motordiag
