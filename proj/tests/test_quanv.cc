#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "quanvnet/errors.h"
#include "quanvnet/quanv.h"
#include "quanvnet/rng.h"

namespace fs = std::filesystem;
using namespace quanvnet;
using namespace quanvnet::quanv;

namespace {

GrayImage random_unit_image(Rng& rng) {
    GrayImage img(kImageSize, kImageSize);
    for (double& v : img.pixels()) v = rng.uniform01();
    return img;
}

}  // namespace

TEST(Quanv, EmptyCircuitGivesCosineOfEncodedAngle) {
    Rng rng(1);
    const qsim::Circuit empty(kQubits);
    for (Encoding enc : {Encoding::RY, Encoding::RX}) {
        QuanvConfig cfg;
        cfg.encoding = enc;
        const GrayImage img = random_unit_image(rng);
        const FeatureMap map = quanv_image(img, empty, cfg);
        for (std::size_t r = 0; r < kImageSize; ++r)
            for (std::size_t c = 0; c < kImageSize; ++c)
                EXPECT_NEAR(map.at(r / 2, c / 2, 2 * (r % 2) + c % 2), std::cos(std::numbers::pi * img.at(r, c)),
                            1e-12);
    }
}

TEST(Quanv, ProbabilityDecodeIsAffineInZ) {
    QuanvConfig z_cfg, p_cfg;
    p_cfg.decode = Decode::ProbabilityOfZero;
    const Patch patch{{{0.1, 0.7}, {0.3, 0.95}}};
    const qsim::Circuit circuit = generate_random_circuit(4, 2);
    const auto z = quanv_patch(patch, circuit, z_cfg, 0), p = quanv_patch(patch, circuit, p_cfg, 0);
    for (std::size_t q = 0; q < kQubits; ++q) EXPECT_NEAR(p[q], (1 + z[q]) / 2, 1e-12);
}

TEST(Quanv, CnotRingOnBasisInputsMatchesClassicalXor) {
    qsim::Circuit ring(kQubits);
    for (std::size_t q = 0; q < kQubits; ++q) ring.append(qsim::GateId::CNOT, {q, (q + 1) % kQubits});
    const QuanvConfig cfg;
    for (unsigned bits = 0; bits < 16; ++bits) {
        int b[4];
        for (int q = 0; q < 4; ++q) b[q] = (bits >> q) & 1;
        const Patch patch{{{double(b[0]), double(b[1])}, {double(b[2]), double(b[3])}}};
        for (int q = 0; q < 4; ++q) b[(q + 1) % 4] ^= b[q];
        const auto f = quanv_patch(patch, ring, cfg, 0);
        for (int q = 0; q < 4; ++q) EXPECT_NEAR(f[q], b[q] ? -1.0 : 1.0, 1e-12) << bits;
    }
}

TEST(Quanv, RandomCircuitStructureAndDeterminism) {
    const qsim::Circuit c = generate_random_circuit(123, 3);
    ASSERT_EQ(c.ops().size(), 3u * 8u);
    for (std::size_t layer = 0; layer < 3; ++layer) {
        for (std::size_t q = 0; q < 4; ++q) {
            const qsim::Op& rot = c.ops()[layer * 8 + q];
            EXPECT_TRUE(rot.gate == qsim::GateId::RX || rot.gate == qsim::GateId::RY || rot.gate == qsim::GateId::RZ);
            EXPECT_GE(rot.params[0], 0.0);
            EXPECT_LT(rot.params[0], 2 * std::numbers::pi);
            const qsim::Op& cx = c.ops()[layer * 8 + 4 + q];
            EXPECT_EQ(cx.qubits, (std::vector<std::size_t>{q, (q + 1) % 4}));
        }
    }
    EXPECT_EQ(generate_random_circuit(123, 3), c);
    EXPECT_NE(generate_random_circuit(124, 3), c);
    EXPECT_THROW(generate_random_circuit(1, 0), ConfigError);
}

TEST(Quanv, ShotEstimatesAreDeterministicAndNearExact) {
    Rng rng(2);
    const GrayImage img = random_unit_image(rng);
    QuanvConfig exact;
    exact.circuit_seed = 9;
    QuanvConfig shots = exact;
    shots.shots = 1000;
    shots.shot_seed = 17;
    const FeatureMap e = quanv_image(img, exact), a = quanv_image(img, shots), b = quanv_image(img, shots);
    EXPECT_EQ(a, b);
    EXPECT_NE(quanv_image(img, shots, 1), a);  // another image index draws other streams
    for (std::size_t i = 0; i < e.values().size(); ++i) {
        EXPECT_LE(std::abs(a.values()[i] - e.values()[i]), 5 / std::sqrt(1000.0));
        const double k = a.values()[i] * 1000 / 2;  // (n0 - n1) / 1000 is a multiple of 2/1000
        EXPECT_NEAR(k, std::round(k), 1e-9);
    }
}

TEST(Quanv, RejectsBadInputs) {
    QuanvConfig cfg;
    EXPECT_THROW(encode_patch(Patch{{{1.5, 0}, {0, 0}}}, cfg), InputError);
    EXPECT_THROW(quanv_image(GrayImage(27, 28), cfg), InputError);
    cfg.circuit_depth = 0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg.circuit_depth = 1;
    cfg.angle_scale = 0;
    EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Quanv, DigestTracksEverySetting) {
    const QuanvConfig base;
    const IngestOptions ingest;
    const Digest d = preprocess_digest(base, ingest);
    auto differs = [&](QuanvConfig c, IngestOptions i = {}) { return preprocess_digest(c, i) != d; };
    QuanvConfig c = base;
    c.shots = 1;
    EXPECT_TRUE(differs(c));
    c = base;
    c.encoding = Encoding::RX;
    EXPECT_TRUE(differs(c));
    c = base;
    c.shot_seed = 1;
    EXPECT_TRUE(differs(c));
    c = base;
    c.decode = Decode::ProbabilityOfZero;
    EXPECT_TRUE(differs(c));
    EXPECT_TRUE(differs(base, IngestOptions{250.0}));
    EXPECT_EQ(preprocess_digest(base, ingest), d);
}

TEST(Quanv, PreprocessIsIndependentOfWorkerCount) {
    const fs::path dir = fs::temp_directory_path() / "quanvnet_test_quanv";
    fs::create_directories(dir);
    Rng rng(3);
    std::vector<ManifestEntry> entries;
    for (int i = 0; i < 12; ++i) {
        GrayImage img(30, 26);
        for (double& v : img.pixels()) v = std::floor(rng.uniform(0, 256));
        const fs::path p = dir / ("img" + std::to_string(i) + ".pgm");
        write_pgm(p, img);
        entries.push_back({p, i % 2 ? Label::Covid19 : Label::Normal, Split::Train, "img" + std::to_string(i)});
    }
    QuanvConfig cfg;
    cfg.shots = 50;
    const CacheSummary one = preprocess_dataset(entries, cfg, {}, dir / "one.qvc", 1);
    const CacheSummary three = preprocess_dataset(entries, cfg, {}, dir / "three.qvc", 3);
    ASSERT_TRUE(one.ok());
    EXPECT_EQ(one.records, 12u);
    EXPECT_EQ(one.per_class.at(Label::Covid19), 6u);
    EXPECT_EQ(one.checksum, three.checksum);
    EXPECT_EQ(one.config_digest, preprocess_digest(cfg, {}));

    entries.push_back({dir / "missing.pgm", Label::Normal, Split::Train, "missing"});
    const CacheSummary failed = preprocess_dataset(entries, cfg, {}, dir / "one.qvc", 2);
    EXPECT_FALSE(failed.ok());
    ASSERT_EQ(failed.failures.size(), 1u);
    EXPECT_FALSE(fs::exists(dir / "one.qvc"));
}
