#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "quanvnet/dataset.h"
#include "quanvnet/digest.h"
#include "quanvnet/image.h"
#include "quanvnet/qsim.h"

// Quanvolutional preprocessing.
//
// A 28x28 image is tiled into non-overlapping 2x2 patches. Pixel (r, c) of a patch
// is angle-encoded on qubit 2r + c, a fixed random circuit is applied, and each
// qubit's Pauli-Z statistic becomes one channel at output position (row/2, col/2).

namespace quanvnet::quanv {

inline constexpr std::size_t kImageSize = 28;
inline constexpr std::size_t kPatchSize = 2;
inline constexpr std::size_t kStride = 2;
inline constexpr std::size_t kQubits = 4;
inline constexpr std::size_t kOutSize = kImageSize / kStride;  // 14
inline constexpr std::size_t kChannels = kQubits;

enum class Encoding { RY, RX };
enum class Decode { ZExpectation, ProbabilityOfZero };

std::string_view encoding_name(Encoding e);
Encoding parse_encoding(std::string_view text);
std::string_view decode_name(Decode d);
Decode parse_decode(std::string_view text);

struct QuanvConfig {
    Encoding encoding = Encoding::RY;
    std::uint64_t shots = 0;  // 0 = exact expectation
    std::uint64_t circuit_seed = 0;
    std::uint64_t circuit_depth = 1;
    double angle_scale = 3.141592653589793;  // radians per unit intensity
    Decode decode = Decode::ZExpectation;
    std::uint64_t shot_seed = 0;  // root of per-(image, patch) measurement streams

    /// Throws ConfigError when depth is 0 or angle_scale is not positive.
    void validate() const;
    /// Canonical text form; the input to the config digest.
    std::string canonical() const;
};

using Patch = std::array<std::array<double, 2>, 2>;
using PatchFeatures = std::array<double, kQubits>;

/// 14x14x4 map stored row-major in (h, w, c) order.
class FeatureMap {
   public:
    FeatureMap() : values_(kOutSize * kOutSize * kChannels, 0.0) {}
    explicit FeatureMap(std::vector<double> values);

    static constexpr std::size_t height() { return kOutSize; }
    static constexpr std::size_t width() { return kOutSize; }
    static constexpr std::size_t channels() { return kChannels; }

    double at(std::size_t h, std::size_t w, std::size_t c) const { return values_[(h * kOutSize + w) * kChannels + c]; }
    double& at(std::size_t h, std::size_t w, std::size_t c) { return values_[(h * kOutSize + w) * kChannels + c]; }
    const std::vector<double>& values() const { return values_; }

    bool operator==(const FeatureMap&) const = default;

   private:
    std::vector<double> values_;
};

/// Per layer: one random rotation (RX/RY/RZ, angle in [0, 2pi)) on each of the 4 qubits,
/// then a CNOT ring 0->1, 1->2, 2->3, 3->0.
qsim::Circuit generate_random_circuit(std::uint64_t seed, std::uint64_t depth);

qsim::Circuit encode_patch(const Patch& patch, const QuanvConfig& config);

PatchFeatures quanv_patch(const Patch& patch, const qsim::Circuit& circuit, const QuanvConfig& config,
                          std::uint64_t rng_seed);

/// Shot-stream seed for one patch of one image.
std::uint64_t patch_seed(const QuanvConfig& config, std::uint64_t image_index, std::uint64_t patch_index);

/// Transforms an image with the circuit generated from config.circuit_seed/depth.
FeatureMap quanv_image(const GrayImage& image, const QuanvConfig& config, std::uint64_t image_index = 0);
/// Transforms an image with an explicit circuit (may be empty).
FeatureMap quanv_image(const GrayImage& image, const qsim::Circuit& circuit, const QuanvConfig& config,
                       std::uint64_t image_index = 0);

struct IngestOptions {
    double divisor = 255.0;
};

/// 32-byte digest of everything that determines cached features.
Digest preprocess_digest(const QuanvConfig& config, const IngestOptions& ingest);

struct PreprocessFailure {
    std::string path;
    std::string error;
};

struct CacheSummary {
    std::size_t records = 0;
    std::map<Label, std::size_t> per_class;
    std::string checksum;  // sha256 of the cache file, hex
    Digest config_digest{};
    std::vector<PreprocessFailure> failures;

    bool ok() const { return failures.empty(); }
};

/// Loads, resizes, normalizes and quanvolves every entry, then writes a QVC1 cache.
/// Entry i uses image index i for its shot streams, so results do not depend on `jobs`.
/// If any entry fails, the failures are reported and no cache file is left behind.
CacheSummary preprocess_dataset(const std::vector<ManifestEntry>& entries, const QuanvConfig& config,
                                const IngestOptions& ingest, const std::filesystem::path& cache_path,
                                unsigned jobs = 1);

}  // namespace quanvnet::quanv
