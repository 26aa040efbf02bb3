#include "quanvnet/rng.h"

#include <limits>

#include "quanvnet/errors.h"

namespace quanvnet {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream, std::uint64_t index) {
    // FNV-1a over the tag keeps derivation independent of std::hash.
    std::uint64_t tag = 0xCBF29CE484222325ULL;
    for (unsigned char c : stream) {
        tag ^= c;
        tag *= 0x100000001B3ULL;
    }
    return splitmix64(splitmix64(splitmix64(seed) ^ tag) ^ index);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return splitmix64(splitmix64(splitmix64(seed) ^ a) ^ splitmix64(b + 0x632BE59BD9B4E019ULL));
}

std::uint64_t Rng::uniform_below(std::uint64_t n) {
    if (n == 0) {
        throw ConfigError("uniform_below needs n > 0");
    }
    // Rejection sampling on the largest multiple of n.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return x % n;
}

}  // namespace quanvnet
