// quanvnet: preprocess, train, evaluate and ablate quanvolutional classifiers.

#include <cstdio>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "quanvnet/errors.h"
#include "quanvnet/pipeline.h"
#include "quanvnet/qsim.h"
#include "quanvnet/synth.h"

namespace {

using quanvnet::pipeline::RunConfig;

struct Options {
    std::string dataset = "D1";
    std::string encoding = "ry";
    std::string decode = "z";
    std::string positive;
    std::uint64_t circuit_seed = 0;
};

void add_run_flags(CLI::App* app, RunConfig& config, Options& opts, bool training) {
    app->add_option("--dataset", opts.dataset, "D1, D2 or D3")->check(CLI::IsMember({"D1", "D2", "D3"}));
    app->add_option("--manifest", config.manifest, "CSV with header path,label,split");
    app->add_option("--encoding", opts.encoding, "Rotation used for angle encoding")->check(CLI::IsMember({"ry", "rx"}));
    app->add_option("--shots", config.shots, "Measurement shots per patch; 0 = exact expectation");
    app->add_option("--circuit-seed", opts.circuit_seed, "Random-circuit seed (default: derived from --seed)");
    app->add_option("--depth", config.depth, "Random-circuit layers")->check(CLI::PositiveNumber);
    app->add_option("--decode", opts.decode, "Feature decoding")->check(CLI::IsMember({"z", "p0"}));
    app->add_option("--divisor", config.divisor, "Intensity normalization divisor")->check(CLI::PositiveNumber);
    app->add_option("--seed", config.seed, "Master seed");
    app->add_option("--jobs", config.jobs, "Preprocessing worker threads")->check(CLI::PositiveNumber);
    app->add_option("--out", config.out, "Run directory");
    if (training) {
        app->add_option("--epochs", config.epochs, "Training epochs");
        app->add_option("--batch", config.batch_size, "Mini-batch size")->check(CLI::PositiveNumber);
        app->add_option("--lr", config.learning_rate, "Adam learning rate")->check(CLI::PositiveNumber);
    }
    app->add_option("--positive-class", opts.positive, "Positive class for binary reports")
        ->check(CLI::IsMember({"normal", "covid19", "pneumonia"}));
}

void finish(CLI::App* app, RunConfig& config, const Options& opts) {
    config.dataset = quanvnet::parse_dataset(opts.dataset);
    config.encoding = quanvnet::quanv::parse_encoding(opts.encoding);
    config.decode = quanvnet::quanv::parse_decode(opts.decode);
    if (app->count("--circuit-seed") > 0) config.circuit_seed = opts.circuit_seed;
    if (!opts.positive.empty()) config.positive = quanvnet::parse_label(opts.positive);
}

/// "H 0; CNOT 0 1; RY(1.0472) 2" applied to |0...0>.
quanvnet::qsim::Circuit parse_circuit(const std::string& text, std::size_t qubits) {
    namespace qsim = quanvnet::qsim;
    qsim::Circuit circuit(qubits);
    std::istringstream ops(text);
    for (std::string op; std::getline(ops, op, ';');) {
        std::istringstream fields(op);
        std::string head;
        if (!(fields >> head)) continue;
        std::vector<double> params;
        if (const auto open = head.find('('); open != std::string::npos) {
            if (head.back() != ')') throw quanvnet::ConfigError("bad gate token: " + head);
            std::istringstream args(head.substr(open + 1, head.size() - open - 2));
            for (std::string a; std::getline(args, a, ',');) params.push_back(std::stod(a));
            head.resize(open);
        }
        std::vector<std::size_t> targets;
        for (std::size_t q; fields >> q;) targets.push_back(q);
        if (!fields.eof()) throw quanvnet::ConfigError("bad qubit list in: " + op);
        circuit.append(qsim::parse_gate(head), params, targets);
    }
    return circuit;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quanvolutional preprocessing, CNN training and evaluation"};
    app.require_subcommand(1);

    RunConfig config;
    Options opts;

    auto* preprocess = app.add_subcommand("preprocess", "Quanvolve the manifest's images into train/test caches");
    add_run_flags(preprocess, config, opts, false);
    auto* train = app.add_subcommand("train", "Train the classifier on cached features");
    add_run_flags(train, config, opts, true);
    auto* eval = app.add_subcommand("eval", "Evaluate the checkpoint on the test cache");
    add_run_flags(eval, config, opts, false);
    auto* report = app.add_subcommand("report", "Evaluate and write report.md with tables and figures");
    add_run_flags(report, config, opts, false);
    auto* ablate = app.add_subcommand("ablate", "Gate x shots grid of preprocess, train and eval runs");
    add_run_flags(ablate, config, opts, true);
    ablate->add_option("--shots-list", config.shots_list, "Shot counts to sweep")->delimiter(',');

    quanvnet::synth::SyntheticSpec synth_spec;
    std::filesystem::path synth_dir = "synthetic";
    auto* synth = app.add_subcommand("synth", "Write a synthetic blob corpus and manifest");
    synth->add_option("--dataset", opts.dataset, "D1, D2 or D3")->check(CLI::IsMember({"D1", "D2", "D3"}));
    synth->add_option("--train-per-class", synth_spec.train_per_class);
    synth->add_option("--test-per-class", synth_spec.test_per_class);
    synth->add_option("--seed", synth_spec.seed);
    synth->add_option("--out", synth_dir);

    std::size_t sv_qubits = 1;
    std::string sv_circuit;
    auto* statevector = app.add_subcommand("statevector", "Print the statevector of a circuit as CSV");
    statevector->add_option("--qubits", sv_qubits)->required();
    statevector->add_option("--circuit", sv_circuit, "e.g. \"H 0; CNOT 0 1\"")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*synth) {
            synth_spec.dataset = quanvnet::parse_dataset(opts.dataset);
            std::cout << quanvnet::synth::write_corpus(synth_dir, synth_spec).string() << '\n';
            return 0;
        }
        if (*statevector) {
            const auto circuit = parse_circuit(sv_circuit, sv_qubits);
            std::cout << quanvnet::qsim::statevector_csv(
                quanvnet::qsim::run_circuit(circuit, quanvnet::qsim::zero_state(sv_qubits)));
            return 0;
        }
        CLI::App* active = app.get_subcommands().front();
        finish(active, config, opts);
        if (*preprocess) {
            std::cout << quanvnet::pipeline::cmd_preprocess(config).summary_json << '\n';
        } else if (*train) {
            const auto log = quanvnet::pipeline::cmd_train(config);
            std::cout << quanvnet::nn::epoch_log_csv(log);
        } else if (*eval) {
            std::cout << quanvnet::metrics::report_csv(quanvnet::pipeline::cmd_eval(config));
        } else if (*report) {
            std::cout << quanvnet::pipeline::cmd_report(config);
        } else if (*ablate) {
            std::cout << quanvnet::pipeline::ablation_csv(quanvnet::pipeline::cmd_ablate(config));
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "quanvnet: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "quanvnet: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
