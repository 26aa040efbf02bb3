#include "quanvnet/cache.h"

#include <algorithm>

#include "binio.h"
#include "quanvnet/errors.h"

namespace quanvnet::cache {

namespace {
constexpr std::string_view kMagic = "QVC1";
}

std::vector<std::uint8_t> serialize(const CacheFile& cache) {
    const std::size_t per_record = std::size_t{cache.height} * cache.width * cache.channels;
    binio::Writer w;
    w.raw(kMagic);
    w.uint<std::uint32_t>(kVersion);
    w.uint<std::uint32_t>(static_cast<std::uint32_t>(cache.records.size()));
    w.uint<std::uint32_t>(cache.height);
    w.uint<std::uint32_t>(cache.width);
    w.uint<std::uint32_t>(cache.channels);
    w.raw(cache.config_digest);
    for (const Record& r : cache.records) {
        if (r.values.size() != per_record) {
            throw FormatError("cache record '" + r.id + "' has " + std::to_string(r.values.size()) +
                              " values, expected " + std::to_string(per_record));
        }
        if (r.id.size() > 0xFFFF) {
            throw FormatError("cache record id longer than 65535 bytes");
        }
        w.uint<std::uint8_t>(r.label);
        w.uint<std::uint16_t>(static_cast<std::uint16_t>(r.id.size()));
        w.raw(r.id);
        for (float v : r.values) {
            w.f32(v);
        }
    }
    return std::move(w.bytes());
}

CacheFile deserialize(const std::vector<std::uint8_t>& bytes) {
    binio::Reader r(bytes, "QVC1 cache");
    const auto magic = r.raw(4);
    if (!std::equal(magic.begin(), magic.end(), kMagic.begin())) {
        throw FormatError("not a QVC1 cache (bad magic)");
    }
    const auto version = r.uint<std::uint32_t>();
    if (version != kVersion) {
        throw FormatError("unsupported QVC1 version " + std::to_string(version));
    }
    CacheFile out;
    const auto count = r.uint<std::uint32_t>();
    out.height = r.uint<std::uint32_t>();
    out.width = r.uint<std::uint32_t>();
    out.channels = r.uint<std::uint32_t>();
    const auto digest = r.raw(32);
    std::copy(digest.begin(), digest.end(), out.config_digest.begin());
    const std::size_t per_record = std::size_t{out.height} * out.width * out.channels;
    // Each record needs at least 3 + 4*per_record bytes; reject absurd counts before reserving.
    if (std::size_t{count} * (3 + 4 * per_record) > r.remaining()) {
        throw FormatError("QVC1 cache: truncated (header declares " + std::to_string(count) + " records)");
    }
    out.records.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        Record rec;
        rec.label = r.uint<std::uint8_t>();
        const auto id_len = r.uint<std::uint16_t>();
        const auto id = r.raw(id_len);
        rec.id.assign(id.begin(), id.end());
        rec.values.resize(per_record);
        for (auto& v : rec.values) {
            v = r.f32();
        }
        out.records.push_back(std::move(rec));
    }
    r.expect_end();
    return out;
}

void write(const std::filesystem::path& path, const CacheFile& cache) {
    binio::write_file_atomic(path, serialize(cache));
}

CacheFile read(const std::filesystem::path& path) { return deserialize(binio::read_file(path)); }

}  // namespace quanvnet::cache
