#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace quanvnet {

enum class Label : std::uint8_t { Normal = 0, Covid19 = 1, Pneumonia = 2 };
enum class Split : std::uint8_t { Train = 0, Test = 1 };
enum class DatasetId { D1, D2, D3 };

std::string_view label_name(Label label);
Label parse_label(std::string_view text);
std::string_view split_name(Split split);
Split parse_split(std::string_view text);
std::string_view dataset_name(DatasetId id);
DatasetId parse_dataset(std::string_view text);

/// Labels admitted by a dataset, in model class-index order.
/// D1: normal, covid19. D2: covid19, pneumonia. D3: normal, covid19, pneumonia.
std::vector<Label> dataset_classes(DatasetId id);
/// Class index of `label` within dataset_classes(id); nullopt if not admitted.
std::optional<std::size_t> class_index(DatasetId id, Label label);
/// Class treated as positive in binary reports: covid19 for D1, pneumonia for D2.
/// D3 has no single positive class; covid19 is returned for one-vs-rest summaries.
Label default_positive(DatasetId id);

struct ManifestEntry {
    std::filesystem::path path;
    Label label;
    Split split;
    std::string id;  // path as written in the manifest; empty means use `path`

    std::string record_id() const { return id.empty() ? path.string() : id; }
};

struct DatasetManifest {
    DatasetId dataset;
    std::vector<ManifestEntry> entries;
};

/// Parses a `path,label,split` CSV. Relative paths resolve against the manifest's directory.
/// Class constraints are not checked here; see assemble_dataset.
DatasetManifest parse_manifest(const std::filesystem::path& csv_path, DatasetId dataset);
DatasetManifest parse_manifest_text(std::string_view text, DatasetId dataset,
                                    const std::filesystem::path& base_dir = {});
std::string manifest_csv(const DatasetManifest& manifest);

using CountKey = std::pair<Split, Label>;

struct AssembledDataset {
    DatasetId dataset;
    std::vector<ManifestEntry> train;
    std::vector<ManifestEntry> test;
    std::map<CountKey, std::size_t> counts;

    std::size_t total() const { return train.size() + test.size(); }
};

/// Splits a manifest into train and test collections and tallies (split, label) counts.
/// Throws InputError on a label outside the dataset's classes or a duplicated path.
AssembledDataset assemble_dataset(const DatasetManifest& manifest);

/// Published composition of the three corpora: per-(split, label) cells and the printed total.
struct ReferenceComposition {
    std::map<CountKey, std::size_t> cells;
    std::size_t total;
};
ReferenceComposition reference_composition(DatasetId id);

struct CountAudit {
    bool cells_match;
    bool total_match;
    std::string json;
};

/// Compares assembled counts with the reference composition. The JSON is keyed
/// dataset -> split -> label with observed and expected counts.
CountAudit audit_counts(const AssembledDataset& assembled);

}  // namespace quanvnet
