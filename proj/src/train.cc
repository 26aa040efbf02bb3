#include "quanvnet/train.h"

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "quanvnet/errors.h"

namespace quanvnet::nn {

AdamState AdamState::for_params(const std::vector<Tensor>& params, double learning_rate) {
    AdamState state;
    state.learning_rate = learning_rate;
    for (const auto& p : params) {
        state.first_moment.emplace_back(p.shape());
        state.second_moment.emplace_back(p.shape());
    }
    return state;
}

void adam_step(std::vector<Tensor>& params, const std::vector<Tensor>& grads, AdamState& state) {
    if (grads.size() != params.size() || state.first_moment.size() != params.size() ||
        state.second_moment.size() != params.size()) {
        throw InputError("adam: parameter, gradient and moment lists differ in length");
    }
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double correction1 = 1.0 - std::pow(state.beta1, t);
    const double correction2 = 1.0 - std::pow(state.beta2, t);
    for (std::size_t k = 0; k < params.size(); ++k) {
        Tensor& p = params[k];
        const Tensor& g = grads[k];
        Tensor& m = state.first_moment[k];
        Tensor& v = state.second_moment[k];
        if (g.shape() != p.shape() || m.shape() != p.shape() || v.shape() != p.shape()) {
            throw InputError("adam: shape mismatch for parameter " + std::to_string(k));
        }
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
            const double m_hat = m[i] / correction1;
            const double v_hat = v[i] / correction2;
            p[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
        }
    }
}

namespace {

std::size_t argmax(const std::vector<double>& v) {
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

void check_set(const Model& model, const LabeledSet& data, const char* what) {
    if (data.inputs.size() != data.labels.size()) {
        throw InputError(std::string(what) + ": inputs and labels differ in length");
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (data.inputs[i].shape() != model.input_shape()) {
            throw InputError(std::string(what) + ": sample " + std::to_string(i) + " has shape " +
                             shape_string(data.inputs[i].shape()) + ", model expects " +
                             shape_string(model.input_shape()));
        }
        if (data.labels[i] >= model.num_classes()) {
            throw InputError(std::string(what) + ": label " + std::to_string(data.labels[i]) + " >= class count");
        }
    }
}

}  // namespace

Evaluation evaluate(const Model& model, const LabeledSet& data) {
    check_set(model, data, "evaluation set");
    if (data.size() == 0) {
        return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
    }
    double loss = 0;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const Tensor logits = model.forward(data.inputs[i], Mode::Eval);
        const SoftmaxLoss sl = softmax_cross_entropy(logits, data.labels[i]);
        loss += sl.loss;
        correct += argmax(sl.probabilities) == data.labels[i] ? 1 : 0;
    }
    const auto n = static_cast<double>(data.size());
    return {loss / n, static_cast<double>(correct) / n};
}

std::vector<EpochLog> train(Model& model, const LabeledSet& train_set, const TrainConfig& config,
                            const LabeledSet* test_set) {
    check_set(model, train_set, "training set");
    if (test_set) {
        check_set(model, *test_set, "test set");
    }
    if (config.epochs > 0 && train_set.size() == 0) {
        throw InputError("training set is empty");
    }
    if (config.batch_size == 0) {
        throw ConfigError("batch size must be positive");
    }
    if (!(config.learning_rate > 0)) {
        throw ConfigError("learning rate must be positive");
    }

    AdamState adam = AdamState::for_params(model.params(), config.learning_rate);
    std::vector<std::size_t> order(train_set.size());
    std::vector<EpochLog> log;
    std::vector<Tensor> grads;
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng shuffle_rng(derive_seed(config.seed, "shuffle", epoch));
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[shuffle_rng.uniform_below(i)]);
        }
        Rng dropout_rng(derive_seed(config.seed, "dropout", epoch));

        double loss_sum = 0;
        std::size_t correct = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            std::vector<const Tensor*> inputs;
            std::vector<std::size_t> labels;
            grads = model.zero_grads();
            // Per-sample pass so the running train metrics see the same dropout masks as the update.
            Trace trace;
            for (std::size_t k = start; k < end; ++k) {
                const std::size_t idx = order[k];
                const Tensor logits = model.forward(train_set.inputs[idx], Mode::Train, &dropout_rng, &trace);
                const SoftmaxLoss sl = softmax_cross_entropy(logits, train_set.labels[idx]);
                loss_sum += sl.loss;
                correct += argmax(sl.probabilities) == train_set.labels[idx] ? 1 : 0;
                Tensor grad_logits(logits.shape(), sl.probabilities);
                grad_logits[train_set.labels[idx]] -= 1.0;
                model.backward(trace, grad_logits, grads);
            }
            const double scale = 1.0 / static_cast<double>(end - start);
            for (auto& g : grads) {
                for (auto& v : g.values()) {
                    v *= scale;
                }
            }
            adam_step(model.params(), grads, adam);
        }
        const auto n = static_cast<double>(train_set.size());
        EpochLog entry{epoch, loss_sum / n, static_cast<double>(correct) / n,
                       std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
        if (test_set && test_set->size() > 0) {
            const Evaluation e = evaluate(model, *test_set);
            entry.test_loss = e.loss;
            entry.test_acc = e.accuracy;
        }
        log.push_back(entry);
    }
    return log;
}

std::string epoch_log_csv(const std::vector<EpochLog>& log) {
    std::ostringstream out;
    out.precision(17);
    out << "epoch,train_loss,train_acc,test_loss,test_acc\n";
    for (const auto& e : log) {
        out << e.epoch << ',' << e.train_loss << ',' << e.train_acc << ',' << e.test_loss << ',' << e.test_acc << '\n';
    }
    return out.str();
}

}  // namespace quanvnet::nn
