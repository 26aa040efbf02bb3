#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "quanvnet/dataset.h"
#include "quanvnet/metrics.h"
#include "quanvnet/quanv.h"
#include "quanvnet/train.h"

// Stage orchestration behind the command-line tool. Every stage reads and writes
// files under RunConfig::out:
//
//   preprocess  train.qvc test.qvc preprocess.json counts.json
//   train       model.qvm epochs.csv learning_curve.svg loss_curve.svg
//   eval        report.json report.csv confusion.csv roc.csv roc.svg
//   report      report.md (plus the eval outputs)
//   ablate      ablation.csv and one sub-run per (gate, shots) under ablation/
//
// and records itself in run.json. All randomness derives from RunConfig::seed:
//
//   circuit seed   --circuit-seed if given, else derive_seed(seed, "circuit")
//   shot streams   derive_seed(seed, "shots", split) with split 0 = train, 1 = test
//   weight init    derive_seed(seed, "init")
//   training       derive_seed(seed, "train"), which feeds the shuffle and dropout streams

namespace quanvnet::pipeline {

inline constexpr std::string_view kToolVersion = "1.0.0";

struct RunConfig {
    DatasetId dataset = DatasetId::D1;
    std::filesystem::path manifest;
    quanv::Encoding encoding = quanv::Encoding::RY;
    std::uint64_t shots = 0;
    std::optional<std::uint64_t> circuit_seed;
    std::uint64_t depth = 1;
    quanv::Decode decode = quanv::Decode::ZExpectation;
    double divisor = 255.0;
    std::size_t epochs = 20;
    std::size_t batch_size = 32;
    double learning_rate = 1e-4;
    std::uint64_t seed = 0;
    unsigned jobs = 1;
    std::filesystem::path out = "run";
    std::optional<Label> positive;  // defaults to the dataset's positive class (none for D3)
    std::vector<std::uint64_t> shots_list{500, 1000};

    quanv::QuanvConfig quanv_config(Split split) const;
    quanv::IngestOptions ingest_options() const;
    nn::TrainConfig train_config() const;
    std::uint64_t init_seed() const;
    std::optional<std::size_t> positive_index() const;
    std::vector<std::string> class_names() const;
    /// JSON object with every field plus the derived seeds.
    std::string to_json() const;
};

struct PreprocessResult {
    quanv::CacheSummary train;
    quanv::CacheSummary test;
    CountAudit audit;
    std::string summary_json;
};

/// Throws IngestionError if any image fails; no cache is left behind in that case.
PreprocessResult cmd_preprocess(const RunConfig& config);

/// Refuses (ConfigError) when a cache is missing or was built with a different config.
std::vector<nn::EpochLog> cmd_train(const RunConfig& config);

/// Throws InputError when the checkpoint's class count differs from the dataset's.
metrics::MetricsReport cmd_eval(const RunConfig& config);

/// Re-evaluates and writes report.md; returns its text.
std::string cmd_report(const RunConfig& config);

struct AblationRow {
    quanv::Encoding encoding;
    std::uint64_t shots;
    double accuracy;
    double sensitivity;
    double specificity;
    double precision;
    double f1;
};

/// Runs preprocess, train and eval for {RY, RX} x shots_list with one training seed.
std::vector<AblationRow> cmd_ablate(const RunConfig& config);
/// Columns gate,shots,acc,sns,spc,prc,f1 with one-decimal percentages.
std::string ablation_csv(const std::vector<AblationRow>& rows);

}  // namespace quanvnet::pipeline
