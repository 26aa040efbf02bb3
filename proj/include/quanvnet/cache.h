#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "quanvnet/digest.h"

// QVC1 feature cache, little-endian:
//   "QVC1" | version u32 | record count u32 | height u32 | width u32 | channels u32 | config digest [32]
//   per record: label u8 | id length u16 | id bytes (UTF-8) | height*width*channels binary32, (h, w, c) order

namespace quanvnet::cache {

inline constexpr std::uint32_t kVersion = 1;

struct Record {
    std::uint8_t label = 0;
    std::string id;
    std::vector<float> values;

    bool operator==(const Record&) const = default;
};

struct CacheFile {
    std::uint32_t height = 0;
    std::uint32_t width = 0;
    std::uint32_t channels = 0;
    Digest config_digest{};
    std::vector<Record> records;

    bool operator==(const CacheFile&) const = default;
};

std::vector<std::uint8_t> serialize(const CacheFile& cache);
/// Throws FormatError on bad magic, unsupported version, truncation or trailing bytes.
CacheFile deserialize(const std::vector<std::uint8_t>& bytes);

/// Writes to a temporary sibling and renames into place.
void write(const std::filesystem::path& path, const CacheFile& cache);
CacheFile read(const std::filesystem::path& path);

}  // namespace quanvnet::cache
