#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "quanvnet/digest.h"
#include "quanvnet/errors.h"
#include "quanvnet/model.h"
#include "quanvnet/pipeline.h"
#include "quanvnet/synth.h"

namespace fs = std::filesystem;
using namespace quanvnet;
using pipeline::RunConfig;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "quanvnet_test_pipeline" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

RunConfig small_run(const fs::path& root, DatasetId dataset = DatasetId::D1) {
    RunConfig cfg;
    cfg.dataset = dataset;
    cfg.manifest = synth::write_corpus(root / "corpus", {dataset, 30, 10, 5});
    cfg.out = root / "run";
    cfg.epochs = 2;
    cfg.seed = 11;
    return cfg;
}

}  // namespace

TEST(Pipeline, StagesWriteTheirOutputs) {
    const RunConfig cfg = small_run(fresh_dir("stages"));
    const auto pre = pipeline::cmd_preprocess(cfg);
    EXPECT_EQ(pre.train.records, 60u);
    EXPECT_EQ(pre.test.records, 20u);
    EXPECT_FALSE(pre.audit.cells_match);
    EXPECT_EQ(nlohmann::json::parse(pre.summary_json)["records"], 80);

    const auto log = pipeline::cmd_train(cfg);
    EXPECT_EQ(log.size(), 2u);
    const auto report = pipeline::cmd_eval(cfg);
    EXPECT_EQ(report.confusion.total(), 20u);
    ASSERT_TRUE(report.positive.has_value());
    EXPECT_EQ(report.class_names[*report.positive], "covid19");
    const std::string md = pipeline::cmd_report(cfg);
    EXPECT_NE(md.find("| binary | covid19 |"), std::string::npos);

    for (const char* f : {"train.qvc", "test.qvc", "preprocess.json", "counts.json", "model.qvm", "epochs.csv",
                          "learning_curve.svg", "loss_curve.svg", "report.json", "report.csv", "confusion.csv",
                          "roc.csv", "roc.svg", "report.md", "run.json"}) {
        EXPECT_TRUE(fs::exists(cfg.out / f)) << f;
    }
    const auto run = nlohmann::json::parse(slurp(cfg.out / "run.json"));
    for (const char* stage : {"preprocess", "train", "eval", "report"}) EXPECT_TRUE(run["stages"].contains(stage));
    EXPECT_EQ(run["config"]["derived"]["init_seed"], cfg.init_seed());
}

TEST(Pipeline, RefusesStaleCachesAndMismatchedCheckpoints) {
    RunConfig cfg = small_run(fresh_dir("stale"));
    pipeline::cmd_preprocess(cfg);
    RunConfig changed = cfg;
    changed.shots = 10;
    EXPECT_THROW(pipeline::cmd_train(changed), ConfigError);
    changed = cfg;
    changed.divisor = 250;
    EXPECT_THROW(pipeline::cmd_train(changed), ConfigError);

    pipeline::cmd_train(cfg);
    RunConfig three = cfg;
    three.dataset = DatasetId::D3;
    EXPECT_THROW(pipeline::cmd_eval(three), InputError);
    RunConfig d2 = cfg;
    d2.dataset = DatasetId::D2;
    EXPECT_THROW(pipeline::cmd_train(d2), InputError);  // normal is not a D2 class
    RunConfig missing = cfg;
    missing.out = cfg.out / "nowhere";
    EXPECT_THROW(pipeline::cmd_train(missing), ConfigError);
}

TEST(Pipeline, ZeroEpochsCheckpointEqualsInitialization) {
    RunConfig cfg = small_run(fresh_dir("epochs0"));
    cfg.epochs = 0;
    pipeline::cmd_preprocess(cfg);
    EXPECT_TRUE(pipeline::cmd_train(cfg).empty());
    nn::Model init = nn::Model::default_model(2);
    init.initialize(cfg.init_seed());
    EXPECT_EQ(nn::load_checkpoint(cfg.out / "model.qvm"), init);
}

TEST(Pipeline, IngestionFailureLeavesNoCache) {
    RunConfig cfg = small_run(fresh_dir("broken"));
    fs::remove(cfg.manifest.parent_path() / "images" / "test_normal_3.pgm");
    EXPECT_THROW(pipeline::cmd_preprocess(cfg), IngestionError);
    EXPECT_FALSE(fs::exists(cfg.out / "train.qvc"));
    EXPECT_FALSE(fs::exists(cfg.out / "test.qvc"));
}

TEST(Pipeline, PositiveClassMustBelongToDataset) {
    RunConfig cfg;
    cfg.positive = Label::Pneumonia;
    EXPECT_THROW(cfg.positive_index(), ConfigError);
    cfg.dataset = DatasetId::D3;
    EXPECT_EQ(cfg.positive_index(), 2u);
    cfg.positive.reset();
    EXPECT_FALSE(cfg.positive_index().has_value());
    cfg.dataset = DatasetId::D2;
    EXPECT_EQ(cfg.positive_index(), 1u);
}

TEST(Pipeline, ThreeClassRunReportsEveryClass) {
    RunConfig cfg = small_run(fresh_dir("d3"), DatasetId::D3);
    pipeline::cmd_preprocess(cfg);
    pipeline::cmd_train(cfg);
    const auto report = pipeline::cmd_eval(cfg);
    EXPECT_EQ(report.per_class.size(), 3u);
    EXPECT_FALSE(report.positive.has_value());
    const std::string roc = slurp(cfg.out / "roc.csv");
    EXPECT_EQ(roc.rfind("class,threshold,fpr,tpr\n", 0), 0u);
}

TEST(Pipeline, AblationGridShapeAndRepeatability) {
    const fs::path root = fresh_dir("ablate");
    RunConfig cfg = small_run(root);
    cfg.epochs = 1;
    cfg.shots_list = {0};
    const auto rows = pipeline::cmd_ablate(cfg);
    ASSERT_EQ(rows.size(), 2u);
    const std::string first = slurp(cfg.out / "ablation.csv");
    EXPECT_EQ(first.substr(0, first.find('\n')), "gate,shots,acc,sns,spc,prc,f1");
    EXPECT_EQ(first.rfind("gate,shots,acc,sns,spc,prc,f1\nRY,0,", 0), 0u);
    EXPECT_NE(first.find("\nRX,0,"), std::string::npos);

    cfg.shots_list = {5, 10};
    EXPECT_EQ(pipeline::cmd_ablate(cfg).size(), 4u);
    const std::string a = slurp(cfg.out / "ablation.csv");
    pipeline::cmd_ablate(cfg);
    EXPECT_EQ(slurp(cfg.out / "ablation.csv"), a);
}

TEST(Pipeline, PublishedD1CompositionPreprocessesTo2736Records) {
    const fs::path root = fresh_dir("d1");
    fs::create_directories(root / "img");
    const GrayImage img(28, 28, 100.0);
    write_pgm(root / "img" / "x.pgm", img);
    std::ostringstream manifest;
    manifest << "path,label,split\n";
    std::size_t n = 0;
    for (const auto& [key, count] : reference_composition(DatasetId::D1).cells) {
        for (std::size_t i = 0; i < count; ++i, ++n) {
            const std::string name = "img/" + std::to_string(n) + ".pgm";
            fs::create_hard_link(root / "img" / "x.pgm", root / name);
            manifest << name << ',' << label_name(key.second) << ',' << split_name(key.first) << '\n';
        }
    }
    std::ofstream(root / "manifest.csv") << manifest.str();
    RunConfig cfg;
    cfg.manifest = root / "manifest.csv";
    cfg.out = root / "run";
    const auto pre = pipeline::cmd_preprocess(cfg);
    EXPECT_EQ(pre.train.records + pre.test.records, 2736u);
    EXPECT_TRUE(pre.audit.cells_match);
    EXPECT_TRUE(pre.audit.total_match);
    EXPECT_EQ(pipeline::cmd_preprocess(cfg).train.checksum, pre.train.checksum);
}
