#include "quanvnet/pipeline.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "binio.h"
#include "json.hpp"
#include "quanvnet/cache.h"
#include "quanvnet/errors.h"
#include "quanvnet/model.h"
#include "quanvnet/plot.h"
#include "quanvnet/rng.h"

namespace quanvnet::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* cache_name(Split split) { return split == Split::Train ? "train.qvc" : "test.qvc"; }

std::string sha_hex(const fs::path& path) { return to_hex(sha256_file(path)); }

json config_json(const RunConfig& c) {
    json j;
    j["dataset"] = dataset_name(c.dataset);
    j["manifest"] = c.manifest.string();
    j["encoding"] = quanv::encoding_name(c.encoding);
    j["shots"] = c.shots;
    j["circuit_seed"] = c.circuit_seed ? json(*c.circuit_seed) : json(nullptr);
    j["depth"] = c.depth;
    j["decode"] = quanv::decode_name(c.decode);
    j["divisor"] = c.divisor;
    j["epochs"] = c.epochs;
    j["batch_size"] = c.batch_size;
    j["learning_rate"] = c.learning_rate;
    j["seed"] = c.seed;
    j["jobs"] = c.jobs;
    j["out"] = c.out.string();
    j["positive_class"] = c.positive ? json(label_name(*c.positive)) : json(nullptr);
    j["shots_list"] = c.shots_list;
    const quanv::QuanvConfig train_q = c.quanv_config(Split::Train);
    j["derived"] = {{"circuit_seed", train_q.circuit_seed},
                    {"shot_seed_train", train_q.shot_seed},
                    {"shot_seed_test", c.quanv_config(Split::Test).shot_seed},
                    {"init_seed", c.init_seed()},
                    {"train_seed", c.train_config().seed}};
    return j;
}

/// Records a finished stage in run.json, keeping earlier stages.
void record_stage(const RunConfig& config, const std::string& stage, json outputs) {
    const fs::path path = config.out / "run.json";
    json run = json::object();
    if (fs::exists(path)) {
        try {
            const auto bytes = binio::read_file(path);
            run = json::parse(bytes.begin(), bytes.end());
        } catch (const std::exception&) {
            run = json::object();
        }
    }
    run["tool"] = "quanvnet";
    run["version"] = kToolVersion;
    run["rng"] = kRngAlgorithm;
    run["config"] = config_json(config);
    run["stages"][stage] = {{"config", config_json(config)}, {"outputs", std::move(outputs)}};
    binio::write_file_atomic(path, run.dump(2) + "\n");
}

void write_text(const fs::path& path, const std::string& text) { binio::write_file_atomic(path, text); }

nn::LabeledSet load_split(const RunConfig& config, Split split) {
    const fs::path path = config.out / cache_name(split);
    if (!fs::exists(path)) {
        throw ConfigError("missing cache " + path.string() + "; run preprocess first");
    }
    const cache::CacheFile file = cache::read(path);
    const Digest expected = quanv::preprocess_digest(config.quanv_config(split), config.ingest_options());
    if (file.config_digest != expected) {
        throw ConfigError("stale cache " + path.string() + ": built with a different preprocessing config (" +
                          to_hex(file.config_digest) + " != " + to_hex(expected) + "); rerun preprocess");
    }
    if (file.height != quanv::kOutSize || file.width != quanv::kOutSize || file.channels != quanv::kChannels) {
        throw FormatError("cache " + path.string() + " does not hold 14x14x4 feature maps");
    }
    nn::LabeledSet set;
    for (const auto& rec : file.records) {
        if (rec.label > static_cast<std::uint8_t>(Label::Pneumonia)) {
            throw FormatError("cache record " + rec.id + " has unknown label " + std::to_string(rec.label));
        }
        const auto label = static_cast<Label>(rec.label);
        const auto index = class_index(config.dataset, label);
        if (!index) {
            throw InputError("cache record " + rec.id + " has label " + std::string(label_name(label)) +
                             ", which is not a class of " + std::string(dataset_name(config.dataset)));
        }
        set.inputs.emplace_back(nn::Shape{file.height, file.width, file.channels},
                                std::vector<double>(rec.values.begin(), rec.values.end()));
        set.labels.push_back(*index);
    }
    return set;
}

std::string learning_curve_svg(const std::vector<nn::EpochLog>& log, bool loss) {
    plot::Axes axes;
    axes.title = loss ? "Loss per epoch" : "Accuracy per epoch";
    axes.x_label = "epoch";
    axes.y_label = loss ? "cross-entropy" : "accuracy";
    axes.x_max = std::max<double>(1.0, static_cast<double>(log.size()));
    if (loss) {
        double top = 0.0;
        for (const auto& e : log) {
            for (double v : {e.train_loss, e.test_loss}) {
                if (std::isfinite(v)) top = std::max(top, v);
            }
        }
        axes.y_max = std::max(1.0, std::ceil(top * 2.0) / 2.0);
    }
    plot::Series train{"train", {}, false}, test{"test", {}, false};
    for (const auto& e : log) {
        const double x = static_cast<double>(e.epoch);
        train.points.emplace_back(x, loss ? e.train_loss : e.train_acc);
        const double t = loss ? e.test_loss : e.test_acc;
        if (std::isfinite(t)) test.points.emplace_back(x, t);
    }
    return plot::line_chart_svg(axes, {train, test});
}

std::string roc_svg(const metrics::MetricsReport& report) {
    plot::Axes axes;
    axes.title = "ROC";
    axes.x_label = "false positive rate";
    axes.y_label = "true positive rate";
    axes.diagonal = true;
    std::vector<plot::Series> series;
    for (std::size_t k = 0; k < report.roc.size(); ++k) {
        if (report.positive && *report.positive != k) continue;
        const auto& curve = report.roc[k];
        if (curve.points.empty()) continue;
        std::ostringstream label;
        label.setf(std::ios::fixed);
        label.precision(3);
        label << report.class_names[k] << " (AUC " << curve.auc << ")";
        plot::Series s{label.str(), {}, false};
        for (const auto& p : curve.points) s.points.emplace_back(p.fpr, p.tpr);
        series.push_back(std::move(s));
    }
    return plot::line_chart_svg(axes, series);
}


metrics::MetricsReport evaluate_run(const RunConfig& config) {
    const fs::path model_path = config.out / "model.qvm";
    if (!fs::exists(model_path)) {
        throw ConfigError("missing checkpoint " + model_path.string() + "; run train first");
    }
    const nn::Model model = nn::load_checkpoint(model_path);
    const std::vector<std::string> names = config.class_names();
    if (model.num_classes() != names.size()) {
        throw InputError("checkpoint has " + std::to_string(model.num_classes()) + " classes but " +
                         std::string(dataset_name(config.dataset)) + " has " + std::to_string(names.size()));
    }
    const nn::LabeledSet test = load_split(config, Split::Test);
    if (test.size() == 0) {
        throw InputError("test split is empty");
    }
    metrics::ReportOptions options;
    options.class_names = names;
    options.positive = config.positive_index();
    return metrics::evaluate_predictions(test.labels, model.predict_proba(test.inputs), options);
}

void write_eval_outputs(const RunConfig& config, const metrics::MetricsReport& report) {
    write_text(config.out / "report.json", metrics::report_json(report) + "\n");
    write_text(config.out / "report.csv", metrics::report_csv(report));
    write_text(config.out / "confusion.csv", metrics::confusion_csv(report.confusion, report.class_names));
    if (report.positive) {
        write_text(config.out / "roc.csv", metrics::roc_csv(report.roc.at(*report.positive)));
    } else {
        std::ostringstream all;
        all << "class,";
        bool header = true;
        for (std::size_t k = 0; k < report.roc.size(); ++k) {
            std::istringstream lines(metrics::roc_csv(report.roc[k]));
            std::string line;
            std::getline(lines, line);
            if (header) {
                all << line << '\n';
                header = false;
            }
            while (std::getline(lines, line)) all << report.class_names[k] << ',' << line << '\n';
        }
        write_text(config.out / "roc.csv", all.str());
    }
    write_text(config.out / "roc.svg", roc_svg(report));
}

}  // namespace

quanv::QuanvConfig RunConfig::quanv_config(Split split) const {
    quanv::QuanvConfig q;
    q.encoding = encoding;
    q.shots = shots;
    q.circuit_seed = circuit_seed ? *circuit_seed : derive_seed(seed, "circuit");
    q.circuit_depth = depth;
    q.decode = decode;
    q.shot_seed = derive_seed(seed, "shots", static_cast<std::uint64_t>(split));
    return q;
}

quanv::IngestOptions RunConfig::ingest_options() const { return {divisor}; }

nn::TrainConfig RunConfig::train_config() const {
    return {epochs, batch_size, learning_rate, derive_seed(seed, "train")};
}

std::uint64_t RunConfig::init_seed() const { return derive_seed(seed, "init"); }

std::optional<std::size_t> RunConfig::positive_index() const {
    if (positive) {
        const auto index = class_index(dataset, *positive);
        if (!index) {
            throw ConfigError("positive class " + std::string(label_name(*positive)) + " is not a class of " +
                              std::string(dataset_name(dataset)));
        }
        return index;
    }
    if (dataset == DatasetId::D3) {
        return std::nullopt;
    }
    return class_index(dataset, default_positive(dataset));
}

std::vector<std::string> RunConfig::class_names() const {
    std::vector<std::string> names;
    for (Label l : dataset_classes(dataset)) names.emplace_back(label_name(l));
    return names;
}

std::string RunConfig::to_json() const { return config_json(*this).dump(2); }

PreprocessResult cmd_preprocess(const RunConfig& config) {
    if (config.manifest.empty()) {
        throw ConfigError("preprocess needs --manifest");
    }
    const AssembledDataset data = assemble_dataset(parse_manifest(config.manifest, config.dataset));
    fs::create_directories(config.out);

    PreprocessResult result;
    result.audit = audit_counts(data);
    result.train = quanv::preprocess_dataset(data.train, config.quanv_config(Split::Train), config.ingest_options(),
                                             config.out / cache_name(Split::Train), config.jobs);
    if (result.train.ok()) {
        result.test = quanv::preprocess_dataset(data.test, config.quanv_config(Split::Test), config.ingest_options(),
                                                config.out / cache_name(Split::Test), config.jobs);
    }
    if (!result.train.ok() || !result.test.ok()) {
        std::error_code ec;
        fs::remove(config.out / cache_name(Split::Train), ec);
        fs::remove(config.out / cache_name(Split::Test), ec);
        const auto& failures = result.train.ok() ? result.test.failures : result.train.failures;
        std::string message = std::to_string(failures.size()) + " image(s) failed to preprocess";
        for (std::size_t i = 0; i < std::min<std::size_t>(failures.size(), 5); ++i) {
            message += "\n  " + failures[i].path + ": " + failures[i].error;
        }
        throw IngestionError(message);
    }

    auto split_json = [](const quanv::CacheSummary& s) {
        json per_class = json::object();
        for (const auto& [label, n] : s.per_class) per_class[std::string(label_name(label))] = n;
        return json{{"records", s.records},
                    {"per_class", per_class},
                    {"checksum", s.checksum},
                    {"config_digest", to_hex(s.config_digest)}};
    };
    json summary;
    summary["dataset"] = dataset_name(config.dataset);
    summary["records"] = result.train.records + result.test.records;
    summary["train"] = split_json(result.train);
    summary["test"] = split_json(result.test);
    summary["count_audit"] = json::parse(result.audit.json);
    result.summary_json = summary.dump(2);
    write_text(config.out / "preprocess.json", result.summary_json + "\n");
    write_text(config.out / "counts.json", result.audit.json + "\n");
    record_stage(config, "preprocess", summary);
    return result;
}

std::vector<nn::EpochLog> cmd_train(const RunConfig& config) {
    const nn::LabeledSet train_set = load_split(config, Split::Train);
    const nn::LabeledSet test_set = load_split(config, Split::Test);
    nn::Model model = nn::Model::default_model(config.class_names().size());
    model.initialize(config.init_seed());
    const std::vector<nn::EpochLog> log = nn::train(model, train_set, config.train_config(), &test_set);

    const fs::path model_path = config.out / "model.qvm";
    nn::save_checkpoint(model_path, model);
    write_text(config.out / "epochs.csv", nn::epoch_log_csv(log));
    write_text(config.out / "learning_curve.svg", learning_curve_svg(log, false));
    write_text(config.out / "loss_curve.svg", learning_curve_svg(log, true));
    record_stage(config, "train",
                 {{"checkpoint_sha256", sha_hex(model_path)},
                  {"epoch_log_sha256", sha_hex(config.out / "epochs.csv")},
                  {"train_records", train_set.size()},
                  {"parameters", model.total_parameters()}});
    return log;
}

metrics::MetricsReport cmd_eval(const RunConfig& config) {
    metrics::MetricsReport report = evaluate_run(config);
    write_eval_outputs(config, report);
    record_stage(config, "eval",
                 {{"report_sha256", sha_hex(config.out / "report.json")},
                  {"accuracy", report.accuracy},
                  {"test_records", report.confusion.total()}});
    return report;
}

std::string cmd_report(const RunConfig& config) {
    const metrics::MetricsReport report = evaluate_run(config);
    write_eval_outputs(config, report);

    std::ostringstream md;
    md << "# Evaluation: " << dataset_name(config.dataset) << "\n\n";
    md << "Encoding " << quanv::encoding_name(config.encoding) << ", shots " << config.shots << ", seed "
       << config.seed << ". Percentages are truncated to one decimal.\n\n";
    md << "| scope | class | Acc | Sns | Spc | Prc | F1 | BalAcc | AUC | support |\n";
    md << "|---|---|---|---|---|---|---|---|---|---|\n";
    std::istringstream rows(metrics::report_csv(report));
    std::string line;
    std::getline(rows, line);
    while (std::getline(rows, line)) {
        std::vector<std::string> cells;
        std::istringstream fields(line);
        for (std::string cell; std::getline(fields, cell, ',');) cells.push_back(cell);
        // scope,class,acc,sns,spc,prc,f1,bal_acc,fbeta,fpr,auc,support
        md << "| " << cells[0] << " | " << cells[1];
        for (std::size_t i : {2, 3, 4, 5, 6, 7, 10, 11}) md << " | " << (i < cells.size() ? cells[i] : "");
        md << " |\n";
    }
    md << "\n## Confusion matrix (rows: true, columns: predicted)\n\n| |";
    for (const auto& n : report.class_names) md << ' ' << n << " |";
    md << "\n|---|";
    for (std::size_t k = 0; k < report.class_names.size(); ++k) md << "---|";
    md << '\n';
    for (std::size_t t = 0; t < report.class_names.size(); ++t) {
        md << "| " << report.class_names[t] << " |";
        for (std::size_t p = 0; p < report.class_names.size(); ++p) md << ' ' << report.confusion.at(t, p) << " |";
        md << '\n';
    }
    if (!report.warnings.empty()) {
        md << "\n## Warnings\n\n";
        for (const auto& w : report.warnings) md << "- " << w << '\n';
    }
    md << "\nFigures: learning_curve.svg, loss_curve.svg, roc.svg\n";
    write_text(config.out / "report.md", md.str());
    record_stage(config, "report", {{"report_md_sha256", sha_hex(config.out / "report.md")}});
    return md.str();
}

std::vector<AblationRow> cmd_ablate(const RunConfig& config) {
    if (config.shots_list.empty()) {
        throw ConfigError("ablation needs at least one shot count");
    }
    std::vector<AblationRow> rows;
    json runs = json::array();
    for (quanv::Encoding encoding : {quanv::Encoding::RY, quanv::Encoding::RX}) {
        for (std::uint64_t shots : config.shots_list) {
            RunConfig sub = config;
            sub.encoding = encoding;
            sub.shots = shots;
            sub.out = config.out / "ablation" /
                      (std::string(quanv::encoding_name(encoding)) + "_shots" + std::to_string(shots));
            cmd_preprocess(sub);
            cmd_train(sub);
            const metrics::MetricsReport report = cmd_eval(sub);
            const metrics::ClassMetrics& m = report.positive ? report.headline() : report.macro;
            rows.push_back({encoding, shots, report.accuracy, m.sensitivity, m.specificity, m.precision, m.f1});
            runs.push_back(sub.out.string());
        }
    }
    fs::create_directories(config.out);
    write_text(config.out / "ablation.csv", ablation_csv(rows));
    record_stage(config, "ablate", {{"runs", runs}, {"ablation_sha256", sha_hex(config.out / "ablation.csv")}});
    return rows;
}

std::string ablation_csv(const std::vector<AblationRow>& rows) {
    std::ostringstream out;
    out << "gate,shots,acc,sns,spc,prc,f1\n";
    for (const auto& r : rows) {
        std::string gate(quanv::encoding_name(r.encoding));
        std::transform(gate.begin(), gate.end(), gate.begin(), [](unsigned char c) { return std::toupper(c); });
        out << gate << ',' << r.shots << ',' << metrics::format_percent(r.accuracy) << ','
            << metrics::format_percent(r.sensitivity) << ',' << metrics::format_percent(r.specificity) << ','
            << metrics::format_percent(r.precision) << ',' << metrics::format_percent(r.f1) << '\n';
    }
    return out.str();
}

}  // namespace quanvnet::pipeline
