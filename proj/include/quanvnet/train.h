#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "quanvnet/model.h"
#include "quanvnet/tensor.h"

namespace quanvnet::nn {

struct AdamState {
    std::uint64_t step = 0;
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::vector<Tensor> first_moment;
    std::vector<Tensor> second_moment;

    /// Zeroed moments shaped like `params`.
    static AdamState for_params(const std::vector<Tensor>& params, double learning_rate = 1e-4);
};

/// One bias-corrected Adam update.
void adam_step(std::vector<Tensor>& params, const std::vector<Tensor>& grads, AdamState& state);

/// Inputs and class indices for training or evaluation.
struct LabeledSet {
    std::vector<Tensor> inputs;
    std::vector<std::size_t> labels;

    std::size_t size() const { return inputs.size(); }
};

struct TrainConfig {
    std::size_t epochs = 20;
    std::size_t batch_size = 32;
    double learning_rate = 1e-4;
    std::uint64_t seed = 0;
};

struct EpochLog {
    std::size_t epoch;
    double train_loss;  // mean over the epoch's train-mode passes
    double train_acc;
    double test_loss;  // eval mode; NaN without a test set
    double test_acc;
};

struct Evaluation {
    double loss;
    double accuracy;
};

Evaluation evaluate(const Model& model, const LabeledSet& data);

/// Trains in place. Shuffling and dropout masks come from streams derived from config.seed,
/// so a fixed seed reproduces the trajectory bit for bit. Weights are not initialized here.
std::vector<EpochLog> train(Model& model, const LabeledSet& train_set, const TrainConfig& config,
                            const LabeledSet* test_set = nullptr);

/// CSV with header epoch,train_loss,train_acc,test_loss,test_acc at full precision.
std::string epoch_log_csv(const std::vector<EpochLog>& log);

}  // namespace quanvnet::nn
