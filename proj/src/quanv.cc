#include "quanvnet/quanv.h"

#include <atomic>
#include <cmath>
#include <exception>
#include <numbers>
#include <optional>
#include <sstream>
#include <thread>

#include "quanvnet/cache.h"
#include "quanvnet/errors.h"
#include "quanvnet/rng.h"

namespace quanvnet::quanv {

using qsim::Circuit;
using qsim::GateId;

std::string_view encoding_name(Encoding e) { return e == Encoding::RY ? "ry" : "rx"; }

Encoding parse_encoding(std::string_view text) {
    if (text == "ry" || text == "RY") return Encoding::RY;
    if (text == "rx" || text == "RX") return Encoding::RX;
    throw ConfigError("unknown encoding '" + std::string(text) + "' (expected ry|rx)");
}

std::string_view decode_name(Decode d) { return d == Decode::ZExpectation ? "z" : "p0"; }

Decode parse_decode(std::string_view text) {
    if (text == "z") return Decode::ZExpectation;
    if (text == "p0") return Decode::ProbabilityOfZero;
    throw ConfigError("unknown decode '" + std::string(text) + "' (expected z|p0)");
}

void QuanvConfig::validate() const {
    if (circuit_depth < 1) {
        throw ConfigError("circuit depth must be >= 1");
    }
    if (!(angle_scale > 0) || !std::isfinite(angle_scale)) {
        throw ConfigError("angle scale must be positive and finite");
    }
}

std::string QuanvConfig::canonical() const {
    std::ostringstream out;
    out.precision(17);
    out << "encoding=" << encoding_name(encoding) << ";shots=" << shots << ";circuit_seed=" << circuit_seed
        << ";circuit_depth=" << circuit_depth << ";angle_scale=" << angle_scale << ";decode=" << decode_name(decode)
        << ";shot_seed=" << shot_seed << ";patch=" << kPatchSize << ";stride=" << kStride;
    return out.str();
}

FeatureMap::FeatureMap(std::vector<double> values) : values_(std::move(values)) {
    if (values_.size() != kOutSize * kOutSize * kChannels) {
        throw InputError("feature map must hold 14*14*4 values");
    }
}

Circuit generate_random_circuit(std::uint64_t seed, std::uint64_t depth) {
    if (depth < 1) {
        throw ConfigError("circuit depth must be >= 1");
    }
    static constexpr GateId kRotations[] = {GateId::RX, GateId::RY, GateId::RZ};
    Rng rng(derive_seed(seed, "random-circuit"));
    Circuit circuit(kQubits);
    for (std::uint64_t layer = 0; layer < depth; ++layer) {
        for (std::size_t q = 0; q < kQubits; ++q) {
            const GateId gate = kRotations[rng.uniform_below(3)];
            const double angle = 2 * std::numbers::pi * rng.uniform01();
            circuit.append(gate, {angle}, {q});
        }
        for (std::size_t q = 0; q < kQubits; ++q) {
            circuit.append(GateId::CNOT, {q, (q + 1) % kQubits});
        }
    }
    return circuit;
}

Circuit encode_patch(const Patch& patch, const QuanvConfig& config) {
    const GateId gate = config.encoding == Encoding::RY ? GateId::RY : GateId::RX;
    Circuit circuit(kQubits);
    for (std::size_t r = 0; r < 2; ++r) {
        for (std::size_t c = 0; c < 2; ++c) {
            const double pixel = patch[r][c];
            if (!(pixel >= 0.0 && pixel <= 1.0)) {
                throw InputError("patch pixel (" + std::to_string(r) + "," + std::to_string(c) + ") = " +
                                 std::to_string(pixel) + " outside [0, 1]");
            }
            circuit.append(gate, {config.angle_scale * pixel}, {2 * r + c});
        }
    }
    return circuit;
}

std::uint64_t patch_seed(const QuanvConfig& config, std::uint64_t image_index, std::uint64_t patch_index) {
    return derive_seed(derive_seed(config.shot_seed, "shots"), image_index, patch_index);
}

PatchFeatures quanv_patch(const Patch& patch, const Circuit& circuit, const QuanvConfig& config,
                          std::uint64_t rng_seed) {
    if (circuit.n_qubits() != kQubits) {
        throw ConfigError("quanvolution circuit must act on 4 qubits");
    }
    qsim::Statevector state = qsim::run_circuit(encode_patch(patch, config), qsim::zero_state(kQubits));
    state = qsim::run_circuit(circuit, state);

    PatchFeatures out{};
    if (config.shots == 0) {
        for (std::size_t q = 0; q < kQubits; ++q) {
            const double z = qsim::expectation_z(state, q);
            out[q] = config.decode == Decode::ZExpectation ? z : (1.0 + z) / 2.0;
        }
        return out;
    }
    const qsim::ShotCounts counts = qsim::sample_shots(state, config.shots, rng_seed);
    for (std::size_t q = 0; q < kQubits; ++q) {
        if (config.decode == Decode::ZExpectation) {
            out[q] = qsim::estimate_z_from_shots(counts, q);
        } else {
            out[q] = static_cast<double>(counts.zeros_on(q)) / static_cast<double>(counts.total());
        }
    }
    return out;
}

FeatureMap quanv_image(const GrayImage& image, const Circuit& circuit, const QuanvConfig& config,
                       std::uint64_t image_index) {
    if (image.height() != kImageSize || image.width() != kImageSize) {
        throw InputError("quanvolution expects a 28x28 image, got " + std::to_string(image.height()) + "x" +
                         std::to_string(image.width()));
    }
    FeatureMap out;
    for (std::size_t r = 0; r < kOutSize; ++r) {
        for (std::size_t c = 0; c < kOutSize; ++c) {
            const Patch patch{{{image.at(2 * r, 2 * c), image.at(2 * r, 2 * c + 1)},
                               {image.at(2 * r + 1, 2 * c), image.at(2 * r + 1, 2 * c + 1)}}};
            const std::uint64_t patch_index = r * kOutSize + c;
            const PatchFeatures f = quanv_patch(patch, circuit, config, patch_seed(config, image_index, patch_index));
            for (std::size_t k = 0; k < kChannels; ++k) {
                out.at(r, c, k) = f[k];
            }
        }
    }
    return out;
}

FeatureMap quanv_image(const GrayImage& image, const QuanvConfig& config, std::uint64_t image_index) {
    config.validate();
    return quanv_image(image, generate_random_circuit(config.circuit_seed, config.circuit_depth), config,
                       image_index);
}

Digest preprocess_digest(const QuanvConfig& config, const IngestOptions& ingest) {
    std::ostringstream out;
    out.precision(17);
    out << "QVC1;" << config.canonical() << ";divisor=" << ingest.divisor << ";resize=bilinear-half-pixel"
        << ";size=" << kImageSize << ";luma=rec601;rng=" << kRngAlgorithm;
    return sha256(out.str());
}

CacheSummary preprocess_dataset(const std::vector<ManifestEntry>& entries, const QuanvConfig& config,
                                const IngestOptions& ingest, const std::filesystem::path& cache_path,
                                unsigned jobs) {
    config.validate();
    if (!(ingest.divisor > 0)) {
        throw ConfigError("normalization divisor must be positive");
    }
    const Circuit circuit = generate_random_circuit(config.circuit_seed, config.circuit_depth);

    std::vector<std::optional<FeatureMap>> maps(entries.size());
    std::vector<std::string> errors(entries.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i = next++; i < entries.size(); i = next++) {
            try {
                GrayImage img = normalize(resize_to(load_image(entries[i].path), kImageSize, kImageSize),
                                          ingest.divisor);
                maps[i] = quanv_image(img, circuit, config, i);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    const unsigned n_workers = std::max(1U, std::min<unsigned>(jobs, static_cast<unsigned>(entries.size())));
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < n_workers; ++t) {
            pool.emplace_back(worker);
        }
    }

    CacheSummary summary;
    summary.config_digest = preprocess_digest(config, ingest);
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (!maps[i]) {
            summary.failures.push_back({entries[i].path.string(), errors[i]});
        }
    }
    std::error_code ec;
    if (!summary.ok()) {
        std::filesystem::remove(cache_path, ec);
        return summary;
    }

    cache::CacheFile file;
    file.height = kOutSize;
    file.width = kOutSize;
    file.channels = kChannels;
    file.config_digest = summary.config_digest;
    file.records.reserve(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
        cache::Record rec;
        rec.label = static_cast<std::uint8_t>(entries[i].label);
        rec.id = entries[i].record_id();
        rec.values.assign(maps[i]->values().begin(), maps[i]->values().end());
        file.records.push_back(std::move(rec));
        ++summary.per_class[entries[i].label];
    }
    cache::write(cache_path, file);
    summary.records = file.records.size();
    summary.checksum = to_hex(sha256_file(cache_path));
    return summary;
}

}  // namespace quanvnet::quanv
