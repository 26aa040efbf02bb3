#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace quanvnet {

/// Identifier recorded in run metadata. The engine is std::mt19937_64, whose output
/// sequence is fixed by the standard; distributions are implemented here rather than
/// taken from <random>, because the standard library distributions are not portable.
/// Stream seeds are derived with splitmix64.
inline constexpr std::string_view kRngAlgorithm = "mt19937_64/splitmix64-derive/u53-uniform";

std::uint64_t splitmix64(std::uint64_t x);

/// Deterministically derives a child seed from a parent seed and a stream tag.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream, std::uint64_t index = 0);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b);

class Rng {
   public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }
    /// Uniform in [0, 1) with 53 bits of resolution.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t uniform_below(std::uint64_t n);
    bool bernoulli(double p) { return uniform01() < p; }

   private:
    std::mt19937_64 engine_;
};

}  // namespace quanvnet
