#include "quanvnet/synth.h"

#include <array>
#include <fstream>
#include <sstream>

#include "binio.h"
#include "quanvnet/errors.h"

namespace quanvnet::synth {

namespace {

constexpr std::array<std::array<double, 2>, 3> kCentres = {{{8.0, 8.0}, {19.0, 19.0}, {8.0, 19.0}}};

}  // namespace

GrayImage blob_image(std::size_t class_slot, Rng& rng) {
    if (class_slot >= kCentres.size()) {
        throw ConfigError("synthetic corpora have at most 3 classes");
    }
    const double cr = kCentres[class_slot][0] + rng.uniform(-1.5, 1.5);
    const double cc = kCentres[class_slot][1] + rng.uniform(-1.5, 1.5);
    const double radius = rng.uniform(3.5, 5.0);
    const double peak = rng.uniform(190.0, 255.0);
    GrayImage img(28, 28);
    for (std::size_t r = 0; r < 28; ++r) {
        for (std::size_t c = 0; c < 28; ++c) {
            const double dr = static_cast<double>(r) - cr, dc = static_cast<double>(c) - cc;
            const bool inside = dr * dr + dc * dc <= radius * radius;
            img.at(r, c) = inside ? peak : rng.uniform(0.0, 40.0);
        }
    }
    return img;
}

std::filesystem::path write_corpus(const std::filesystem::path& dir, const SyntheticSpec& spec) {
    const std::vector<Label> classes = dataset_classes(spec.dataset);
    std::filesystem::create_directories(dir / "images");
    Rng rng(derive_seed(spec.seed, "synthetic-corpus"));
    std::ostringstream manifest;
    manifest << "path,label,split\n";
    for (Split split : {Split::Train, Split::Test}) {
        const std::size_t per_class = split == Split::Train ? spec.train_per_class : spec.test_per_class;
        for (std::size_t i = 0; i < per_class; ++i) {
            for (std::size_t k = 0; k < classes.size(); ++k) {
                const std::string name = std::string(split_name(split)) + "_" + std::string(label_name(classes[k])) +
                                         "_" + std::to_string(i) + ".pgm";
                write_pgm(dir / "images" / name, blob_image(k, rng));
                manifest << "images/" << name << ',' << label_name(classes[k]) << ',' << split_name(split) << '\n';
            }
        }
    }
    const std::filesystem::path path = dir / "manifest.csv";
    binio::write_file_atomic(path, manifest.str());
    return path;
}

}  // namespace quanvnet::synth
