#include "quanvnet/dataset.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "quanvnet/errors.h"

namespace quanvnet {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

/// Splits one CSV record honoring double-quoted fields.
std::vector<std::string> split_csv_line(std::string_view line, std::size_t line_no) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(trim(field));
            field.clear();
        } else {
            field.push_back(c);
        }
    }
    if (quoted) {
        throw InputError("manifest line " + std::to_string(line_no) + ": unterminated quote");
    }
    fields.push_back(trim(field));
    return fields;
}

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += "\"\"";
        } else {
            out.push_back(c);
        }
    }
    return out + "\"";
}

}  // namespace

std::string_view label_name(Label label) {
    switch (label) {
        case Label::Normal:
            return "normal";
        case Label::Covid19:
            return "covid19";
        case Label::Pneumonia:
            return "pneumonia";
    }
    return "?";
}

Label parse_label(std::string_view text) {
    if (text == "normal") return Label::Normal;
    if (text == "covid19") return Label::Covid19;
    if (text == "pneumonia") return Label::Pneumonia;
    throw InputError("unknown label '" + std::string(text) + "' (expected normal|covid19|pneumonia)");
}

std::string_view split_name(Split split) { return split == Split::Train ? "train" : "test"; }

Split parse_split(std::string_view text) {
    if (text == "train") return Split::Train;
    if (text == "test") return Split::Test;
    throw InputError("unknown split '" + std::string(text) + "' (expected train|test)");
}

std::string_view dataset_name(DatasetId id) {
    switch (id) {
        case DatasetId::D1:
            return "D1";
        case DatasetId::D2:
            return "D2";
        case DatasetId::D3:
            return "D3";
    }
    return "?";
}

DatasetId parse_dataset(std::string_view text) {
    if (text == "D1" || text == "d1") return DatasetId::D1;
    if (text == "D2" || text == "d2") return DatasetId::D2;
    if (text == "D3" || text == "d3") return DatasetId::D3;
    throw ConfigError("unknown dataset '" + std::string(text) + "' (expected D1|D2|D3)");
}

std::vector<Label> dataset_classes(DatasetId id) {
    switch (id) {
        case DatasetId::D1:
            return {Label::Normal, Label::Covid19};
        case DatasetId::D2:
            return {Label::Covid19, Label::Pneumonia};
        case DatasetId::D3:
            return {Label::Normal, Label::Covid19, Label::Pneumonia};
    }
    return {};
}

std::optional<std::size_t> class_index(DatasetId id, Label label) {
    const auto classes = dataset_classes(id);
    const auto it = std::find(classes.begin(), classes.end(), label);
    if (it == classes.end()) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(it - classes.begin());
}

Label default_positive(DatasetId id) { return id == DatasetId::D2 ? Label::Pneumonia : Label::Covid19; }

DatasetManifest parse_manifest_text(std::string_view text, DatasetId dataset, const std::filesystem::path& base_dir) {
    DatasetManifest manifest{dataset, {}};
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) {
            line.erase(0, 3);
        }
        if (trim(line).empty()) {
            continue;
        }
        auto fields = split_csv_line(line, line_no);
        if (!header_seen) {
            if (fields != std::vector<std::string>{"path", "label", "split"}) {
                throw InputError("manifest header must be 'path,label,split'");
            }
            header_seen = true;
            continue;
        }
        if (fields.size() != 3) {
            throw InputError("manifest line " + std::to_string(line_no) + ": expected 3 fields, got " +
                             std::to_string(fields.size()));
        }
        if (fields[0].empty()) {
            throw InputError("manifest line " + std::to_string(line_no) + ": empty path");
        }
        std::filesystem::path path(fields[0]);
        if (path.is_relative() && !base_dir.empty()) {
            path = base_dir / path;
        }
        manifest.entries.push_back(
            ManifestEntry{path.lexically_normal(), parse_label(fields[1]), parse_split(fields[2]), fields[0]});
    }
    if (!header_seen) {
        throw InputError("manifest is missing the 'path,label,split' header");
    }
    return manifest;
}

DatasetManifest parse_manifest(const std::filesystem::path& csv_path, DatasetId dataset) {
    std::ifstream in(csv_path, std::ios::binary);
    if (!in) {
        throw IngestionError("cannot read manifest '" + csv_path.string() + "'");
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_manifest_text(buffer.str(), dataset, csv_path.parent_path());
}

std::string manifest_csv(const DatasetManifest& manifest) {
    std::string out = "path,label,split\n";
    for (const auto& e : manifest.entries) {
        out += csv_quote(e.record_id()) + "," + std::string(label_name(e.label)) + "," +
               std::string(split_name(e.split)) + "\n";
    }
    return out;
}

AssembledDataset assemble_dataset(const DatasetManifest& manifest) {
    AssembledDataset out{manifest.dataset, {}, {}, {}};
    std::set<std::string> seen;
    for (const auto& e : manifest.entries) {
        if (!class_index(manifest.dataset, e.label)) {
            throw InputError("label '" + std::string(label_name(e.label)) + "' is not part of dataset " +
                             std::string(dataset_name(manifest.dataset)) + " (" + e.path.string() + ")");
        }
        if (!seen.insert(e.path.lexically_normal().string()).second) {
            throw InputError("duplicate manifest path '" + e.path.string() + "'");
        }
        (e.split == Split::Train ? out.train : out.test).push_back(e);
        ++out.counts[{e.split, e.label}];
    }
    return out;
}

ReferenceComposition reference_composition(DatasetId id) {
    using enum Split;
    using enum Label;
    switch (id) {
        case DatasetId::D1:
            return {{{{Train, Covid19}, 1010}, {{Train, Normal}, 1341}, {{Test, Covid19}, 151}, {{Test, Normal}, 234}},
                    2736};
        case DatasetId::D2:
            // The printed train cell reads "3875 normal"; the dataset has no normal class.
            return {{{{Train, Covid19}, 1000},
                     {{Train, Pneumonia}, 3875},
                     {{Test, Covid19}, 161},
                     {{Test, Pneumonia}, 390}},
                    5377};
        case DatasetId::D3:
            return {{{{Train, Normal}, 1341},
                     {{Train, Covid19}, 1000},
                     {{Train, Pneumonia}, 3875},
                     {{Test, Covid19}, 161},
                     {{Test, Pneumonia}, 390},
                     {{Test, Normal}, 234}},
                    6952};
    }
    return {};
}

CountAudit audit_counts(const AssembledDataset& assembled) {
    const ReferenceComposition ref = reference_composition(assembled.dataset);
    nlohmann::json splits = nlohmann::json::object();
    bool cells_match = true;
    for (Split split : {Split::Train, Split::Test}) {
        for (Label label : dataset_classes(assembled.dataset)) {
            const CountKey key{split, label};
            const auto obs_it = assembled.counts.find(key);
            const std::size_t observed = obs_it == assembled.counts.end() ? 0 : obs_it->second;
            const auto ref_it = ref.cells.find(key);
            const std::size_t expected = ref_it == ref.cells.end() ? 0 : ref_it->second;
            cells_match = cells_match && observed == expected;
            splits[std::string(split_name(split))][std::string(label_name(label))] = {
                {"observed", observed}, {"expected", expected}, {"match", observed == expected}};
        }
    }
    const bool total_match = assembled.total() == ref.total;
    nlohmann::json doc;
    auto& ds = doc[std::string(dataset_name(assembled.dataset))];
    ds = splits;
    ds["total"] = {{"observed", assembled.total()}, {"expected", ref.total}, {"match", total_match}};
    return CountAudit{cells_match, total_match, doc.dump(2)};
}

}  // namespace quanvnet
