#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "json.hpp"
#include "quanvnet/dataset.h"
#include "quanvnet/errors.h"

using namespace quanvnet;

namespace {

std::string manifest_with_counts(const std::map<CountKey, std::size_t>& cells) {
    std::ostringstream out;
    out << "path,label,split\n";
    for (const auto& [key, n] : cells) {
        for (std::size_t i = 0; i < n; ++i) {
            out << split_name(key.first) << '/' << label_name(key.second) << i << ".png," << label_name(key.second)
                << ',' << split_name(key.first) << '\n';
        }
    }
    return out.str();
}

}  // namespace

TEST(Dataset, ClassListsAndPositives) {
    EXPECT_EQ(dataset_classes(DatasetId::D1), (std::vector<Label>{Label::Normal, Label::Covid19}));
    EXPECT_EQ(dataset_classes(DatasetId::D2), (std::vector<Label>{Label::Covid19, Label::Pneumonia}));
    EXPECT_EQ(dataset_classes(DatasetId::D3).size(), 3u);
    EXPECT_EQ(default_positive(DatasetId::D1), Label::Covid19);
    EXPECT_EQ(default_positive(DatasetId::D2), Label::Pneumonia);
    EXPECT_FALSE(class_index(DatasetId::D1, Label::Pneumonia).has_value());
    EXPECT_EQ(class_index(DatasetId::D2, Label::Pneumonia), 1u);
}

TEST(Dataset, ParsesManifestWithQuotesAndBom) {
    const auto m = parse_manifest_text(
        "\xEF\xBB\xBFpath,label,split\n\"a, b.png\",covid19,train\r\nimgs/c.png,normal,test\n\n", DatasetId::D1,
        "/data");
    ASSERT_EQ(m.entries.size(), 2u);
    EXPECT_EQ(m.entries[0].path, std::filesystem::path("/data/a, b.png"));
    EXPECT_EQ(m.entries[0].label, Label::Covid19);
    EXPECT_EQ(m.entries[1].split, Split::Test);
    EXPECT_EQ(m.entries[1].record_id(), "imgs/c.png");
    EXPECT_EQ(parse_manifest_text(manifest_csv(m), DatasetId::D1, "/data").entries.size(), 2u);
}

TEST(Dataset, RejectsMalformedManifests) {
    EXPECT_THROW(parse_manifest_text("file,label,split\n", DatasetId::D1), InputError);
    EXPECT_THROW(parse_manifest_text("path,label,split\na.png,Covid,train\n", DatasetId::D1), InputError);
    EXPECT_THROW(parse_manifest_text("path,label,split\na.png,covid19,val\n", DatasetId::D1), InputError);
    EXPECT_THROW(parse_manifest_text("path,label,split\na.png,covid19\n", DatasetId::D1), InputError);
    EXPECT_THROW(parse_manifest_text("path,label,split\n\"a.png,covid19,train\n", DatasetId::D1), InputError);
    EXPECT_THROW(parse_manifest_text("", DatasetId::D1), InputError);
    EXPECT_THROW(parse_manifest("/nonexistent/manifest.csv", DatasetId::D1), IngestionError);
}

TEST(Dataset, AssemblyChecksClassesAndDuplicates) {
    EXPECT_THROW(assemble_dataset(parse_manifest_text("path,label,split\na.png,pneumonia,train\n", DatasetId::D1)),
                 InputError);
    EXPECT_THROW(assemble_dataset(parse_manifest_text(
                     "path,label,split\na.png,normal,train\na.png,normal,test\n", DatasetId::D1)),
                 InputError);
    const auto a = assemble_dataset(
        parse_manifest_text("path,label,split\na.png,normal,train\nb.png,covid19,test\n", DatasetId::D1));
    EXPECT_EQ(a.train.size(), 1u);
    EXPECT_EQ(a.test.size(), 1u);
    EXPECT_EQ(a.counts.at({Split::Test, Label::Covid19}), 1u);
}

TEST(Dataset, D1CompositionAuditsClean) {
    const auto ref = reference_composition(DatasetId::D1);
    EXPECT_EQ(ref.total, 2736u);
    const auto a = assemble_dataset(parse_manifest_text(manifest_with_counts(ref.cells), DatasetId::D1));
    EXPECT_EQ(a.total(), 2736u);
    const CountAudit audit = audit_counts(a);
    EXPECT_TRUE(audit.cells_match);
    EXPECT_TRUE(audit.total_match);
    const auto j = nlohmann::json::parse(audit.json);
    EXPECT_EQ(j["D1"]["train"]["normal"]["observed"], 1341);
    EXPECT_EQ(j["D1"]["test"]["covid19"]["expected"], 151);
}

TEST(Dataset, PrintedTotalsForD2AndD3DisagreeWithTheirCells) {
    for (DatasetId id : {DatasetId::D2, DatasetId::D3}) {
        const auto ref = reference_composition(id);
        const auto a = assemble_dataset(parse_manifest_text(manifest_with_counts(ref.cells), id));
        const CountAudit audit = audit_counts(a);
        EXPECT_TRUE(audit.cells_match);
        EXPECT_FALSE(audit.total_match);
        EXPECT_EQ(a.total(), ref.total + 49);
    }
}

TEST(Dataset, ShortCorpusFailsAudit) {
    const auto a = assemble_dataset(
        parse_manifest_text("path,label,split\na.png,normal,train\n", DatasetId::D1));
    EXPECT_FALSE(audit_counts(a).cells_match);
}
