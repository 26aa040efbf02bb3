#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>

#include "quanvnet/dataset.h"
#include "quanvnet/image.h"
#include "quanvnet/rng.h"

// Synthetic corpora for smoke tests: each class is a bright disk at its own location
// on a dim noisy background.

namespace quanvnet::synth {

struct SyntheticSpec {
    DatasetId dataset = DatasetId::D1;
    std::size_t train_per_class = 500;
    std::size_t test_per_class = 100;
    std::uint64_t seed = 0;
};

/// 28x28 image with 0-255 intensities for class position `class_slot` (0, 1 or 2).
GrayImage blob_image(std::size_t class_slot, Rng& rng);

/// Writes PGM images and a `manifest.csv` under `dir`; returns the manifest path.
std::filesystem::path write_corpus(const std::filesystem::path& dir, const SyntheticSpec& spec);

}  // namespace quanvnet::synth
