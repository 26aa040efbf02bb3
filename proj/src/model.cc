#include "quanvnet/model.h"

#include <cmath>

#include "binio.h"
#include "quanvnet/errors.h"

namespace quanvnet::nn {

std::string_view layer_kind_name(LayerKind kind) {
    switch (kind) {
        case LayerKind::QuanvInput:
            return "QuantumConv";
        case LayerKind::Conv2D:
            return "Conv2D";
        case LayerKind::MaxPool:
            return "MaxPooling2D";
        case LayerKind::Flatten:
            return "Flatten";
        case LayerKind::Dense:
            return "Dense";
        case LayerKind::Dropout:
            return "Dropout";
        case LayerKind::Softmax:
            return "Softmax";
    }
    return "?";
}

std::vector<LayerSpec> default_architecture(std::size_t num_classes, double dropout_rate) {
    return {
        LayerSpec::quanv_input(4),
        LayerSpec::conv(16),
        LayerSpec::maxpool(),
        LayerSpec::dropout(dropout_rate),
        LayerSpec::conv(16),
        LayerSpec::conv(32),
        LayerSpec::maxpool(),
        LayerSpec::dropout(dropout_rate),
        LayerSpec::flatten(),
        LayerSpec::dense(300),
        LayerSpec::dropout(dropout_rate),
        LayerSpec::dense(100),
        LayerSpec::dropout(dropout_rate),
        LayerSpec::dense(num_classes, Activation::None),
        LayerSpec::softmax(),
    };
}

Model::Model(Shape input_shape, std::vector<LayerSpec> specs)
    : input_shape_(std::move(input_shape)), specs_(std::move(specs)) {
    if (specs_.size() < 2 || specs_.back().kind != LayerKind::Softmax) {
        throw ConfigError("architecture must end with a Softmax layer");
    }
    const LayerSpec& head = specs_[specs_.size() - 2];
    if (head.kind != LayerKind::Dense || head.activation != Activation::None || head.units < 2) {
        throw ConfigError("Softmax must follow a linear Dense layer with >= 2 units");
    }
    num_classes_ = head.units;

    Shape shape = input_shape_;
    param_index_.assign(specs_.size(), std::nullopt);
    for (std::size_t l = 0; l < specs_.size(); ++l) {
        const LayerSpec& s = specs_[l];
        switch (s.kind) {
            case LayerKind::QuanvInput:
                if (l != 0 || shape.size() != 3 || shape[2] != s.units) {
                    throw ConfigError("QuanvInput must be the first layer and match the input channels");
                }
                break;
            case LayerKind::Conv2D:
                if (shape.size() != 3 || s.units == 0 || s.kernel_h == 0 || s.kernel_w == 0) {
                    throw ConfigError("Conv2D needs an HxWxC input, filters and a kernel size; input is " +
                                      shape_string(shape));
                }
                param_index_[l] = params_.size();
                params_.emplace_back(Shape{s.kernel_h, s.kernel_w, shape[2], s.units});
                params_.emplace_back(Shape{s.units});
                shape = {shape[0], shape[1], s.units};
                break;
            case LayerKind::MaxPool:
                if (shape.size() != 3 || shape[0] < 2 || shape[1] < 2) {
                    throw ConfigError("MaxPool needs an HxWxC input with H, W >= 2; input is " + shape_string(shape));
                }
                shape = {shape[0] / 2, shape[1] / 2, shape[2]};
                break;
            case LayerKind::Flatten:
                shape = {shape_size(shape)};
                break;
            case LayerKind::Dense:
                if (shape.size() != 1 || s.units == 0) {
                    throw ConfigError("Dense needs a flat input and units > 0; input is " + shape_string(shape));
                }
                param_index_[l] = params_.size();
                params_.emplace_back(Shape{s.units, shape[0]});
                params_.emplace_back(Shape{s.units});
                shape = {s.units};
                break;
            case LayerKind::Dropout:
                if (!(s.dropout_rate >= 0.0 && s.dropout_rate < 1.0)) {
                    throw ConfigError("dropout rate must be in [0, 1)");
                }
                break;
            case LayerKind::Softmax:
                if (l + 1 != specs_.size()) {
                    throw ConfigError("Softmax must be the last layer");
                }
                break;
        }
        shapes_.push_back(shape);
    }
}

Model Model::default_model(std::size_t num_classes, double dropout_rate) {
    return Model({14, 14, 4}, default_architecture(num_classes, dropout_rate));
}

std::vector<LayerParams> Model::parameter_counts() const {
    std::vector<LayerParams> out;
    for (std::size_t l = 0; l < specs_.size(); ++l) {
        if (param_index_[l]) {
            const std::size_t p = *param_index_[l];
            out.push_back({l, params_[p].size() + params_[p + 1].size()});
        }
    }
    return out;
}

std::size_t Model::total_parameters() const {
    std::size_t total = 0;
    for (const auto& t : params_) {
        total += t.size();
    }
    return total;
}

void Model::initialize(std::uint64_t seed) {
    Rng rng(derive_seed(seed, "glorot-init"));
    for (std::size_t l = 0; l < specs_.size(); ++l) {
        if (!param_index_[l]) continue;
        Tensor& weights = params_[*param_index_[l]];
        std::size_t fan_in, fan_out;
        if (specs_[l].kind == LayerKind::Conv2D) {
            const std::size_t receptive = weights.dim(0) * weights.dim(1);
            fan_in = receptive * weights.dim(2);
            fan_out = receptive * weights.dim(3);
        } else {
            fan_in = weights.dim(1);
            fan_out = weights.dim(0);
        }
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        for (auto& w : weights.values()) {
            w = rng.uniform(-limit, limit);
        }
        params_[*param_index_[l] + 1].fill(0.0);
    }
}

Tensor Model::forward(const Tensor& input, Mode mode, Rng* rng, Trace* trace) const {
    if (input.shape() != input_shape_) {
        throw InputError("model expects input " + shape_string(input_shape_) + ", got " + shape_string(input.shape()));
    }
    if (trace) {
        trace->inputs.assign(specs_.size(), Tensor());
        trace->argmax.assign(specs_.size(), {});
        trace->masks.assign(specs_.size(), {});
        trace->pre_activation.assign(specs_.size(), Tensor());
    }
    Tensor x = input;
    for (std::size_t l = 0; l < specs_.size(); ++l) {
        const LayerSpec& s = specs_[l];
        if (trace) {
            trace->inputs[l] = x;
        }
        switch (s.kind) {
            case LayerKind::QuanvInput:
            case LayerKind::Softmax:
                break;
            case LayerKind::Conv2D:
            case LayerKind::Dense: {
                const std::size_t p = *param_index_[l];
                Tensor z = s.kind == LayerKind::Conv2D ? conv2d_forward(x, params_[p], params_[p + 1])
                                                       : dense_forward(x, params_[p], params_[p + 1]);
                if (s.activation == Activation::ReLU) {
                    x = relu(z);
                    if (trace) {
                        trace->pre_activation[l] = std::move(z);
                    }
                } else {
                    x = std::move(z);
                }
                break;
            }
            case LayerKind::MaxPool: {
                MaxPoolResult r = maxpool2x2_forward(x);
                x = std::move(r.output);
                if (trace) {
                    trace->argmax[l] = std::move(r.argmax);
                }
                break;
            }
            case LayerKind::Flatten:
                x = x.reshaped({x.size()});
                break;
            case LayerKind::Dropout: {
                if (mode == Mode::Train && s.dropout_rate > 0 && !rng) {
                    throw ConfigError("train-mode forward with dropout needs an RNG");
                }
                Rng unused(0);
                DropoutResult r = dropout(x, s.dropout_rate, mode, rng ? *rng : unused);
                x = std::move(r.output);
                if (trace) {
                    trace->masks[l] = std::move(r.mask);
                }
                break;
            }
        }
    }
    return x;
}

std::vector<Tensor> Model::zero_grads() const {
    std::vector<Tensor> grads;
    grads.reserve(params_.size());
    for (const auto& p : params_) {
        grads.emplace_back(p.shape());
    }
    return grads;
}

void Model::backward(const Trace& trace, const Tensor& grad_logits, std::vector<Tensor>& grads) const {
    Tensor g = grad_logits;
    for (std::size_t l = specs_.size(); l-- > 0;) {
        const LayerSpec& s = specs_[l];
        switch (s.kind) {
            case LayerKind::QuanvInput:
            case LayerKind::Softmax:
                break;
            case LayerKind::Conv2D:
            case LayerKind::Dense: {
                if (s.activation == Activation::ReLU) {
                    g = relu_backward(trace.pre_activation[l], g);
                }
                const std::size_t p = *param_index_[l];
                const bool need_input_grad = l > 0 && p > 0;
                Tensor grad_in;
                if (s.kind == LayerKind::Conv2D) {
                    conv2d_backward(trace.inputs[l], params_[p], g, need_input_grad ? &grad_in : nullptr, grads[p],
                                    grads[p + 1]);
                } else {
                    dense_backward(trace.inputs[l], params_[p], g, need_input_grad ? &grad_in : nullptr, grads[p],
                                   grads[p + 1]);
                }
                if (!need_input_grad) {
                    return;
                }
                g = std::move(grad_in);
                break;
            }
            case LayerKind::MaxPool:
                g = maxpool2x2_backward(trace.inputs[l].shape(), trace.argmax[l], g);
                break;
            case LayerKind::Flatten:
                g = g.reshaped(trace.inputs[l].shape());
                break;
            case LayerKind::Dropout:
                g = dropout_backward(trace.masks[l], g);
                break;
        }
    }
}

double Model::loss_and_gradients(const std::vector<const Tensor*>& inputs, const std::vector<std::size_t>& labels,
                                 Mode mode, Rng* rng, std::vector<Tensor>& grads) const {
    if (inputs.empty() || inputs.size() != labels.size()) {
        throw InputError("batch must be non-empty with one label per input");
    }
    grads = zero_grads();
    double total_loss = 0;
    Trace trace;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const Tensor logits = forward(*inputs[i], mode, rng, &trace);
        const SoftmaxLoss sl = softmax_cross_entropy(logits, labels[i]);
        total_loss += sl.loss;
        Tensor grad_logits(logits.shape(), sl.probabilities);
        grad_logits[labels[i]] -= 1.0;
        backward(trace, grad_logits, grads);
    }
    const double scale = 1.0 / static_cast<double>(inputs.size());
    for (auto& g : grads) {
        for (auto& v : g.values()) {
            v *= scale;
        }
    }
    return total_loss * scale;
}

std::vector<std::vector<double>> Model::predict_proba(const std::vector<Tensor>& inputs) const {
    std::vector<std::vector<double>> out;
    out.reserve(inputs.size());
    for (const auto& x : inputs) {
        const Tensor logits = forward(x, Mode::Eval);
        out.push_back(softmax(logits.values()));
    }
    return out;
}

namespace {
constexpr std::string_view kCheckpointMagic = "QVM1";
constexpr std::uint32_t kCheckpointVersion = 1;
}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(const Model& model) {
    binio::Writer w;
    w.raw(kCheckpointMagic);
    w.uint<std::uint32_t>(kCheckpointVersion);
    w.uint<std::uint32_t>(static_cast<std::uint32_t>(model.input_shape().size()));
    for (auto d : model.input_shape()) {
        w.uint<std::uint32_t>(static_cast<std::uint32_t>(d));
    }
    w.uint<std::uint32_t>(static_cast<std::uint32_t>(model.specs().size()));
    for (const LayerSpec& s : model.specs()) {
        w.uint<std::uint8_t>(static_cast<std::uint8_t>(s.kind));
        w.uint<std::uint32_t>(static_cast<std::uint32_t>(s.units));
        w.uint<std::uint32_t>(static_cast<std::uint32_t>(s.kernel_h));
        w.uint<std::uint32_t>(static_cast<std::uint32_t>(s.kernel_w));
        w.uint<std::uint8_t>(static_cast<std::uint8_t>(s.activation));
        w.f64(s.dropout_rate);
    }
    for (const Tensor& t : model.params()) {
        for (double v : t.values()) {
            w.f64(v);
        }
    }
    return std::move(w.bytes());
}

Model deserialize_checkpoint(const std::vector<std::uint8_t>& bytes) {
    binio::Reader r(bytes, "QVM1 checkpoint");
    const auto magic = r.raw(4);
    if (!std::equal(magic.begin(), magic.end(), kCheckpointMagic.begin())) {
        throw FormatError("not a QVM1 checkpoint (bad magic)");
    }
    const auto version = r.uint<std::uint32_t>();
    if (version != kCheckpointVersion) {
        throw FormatError("unsupported QVM1 version " + std::to_string(version));
    }
    const auto rank = r.uint<std::uint32_t>();
    if (rank > 8) {
        throw FormatError("QVM1 checkpoint: implausible input rank");
    }
    Shape input_shape(rank);
    for (auto& d : input_shape) {
        d = r.uint<std::uint32_t>();
    }
    const auto n_layers = r.uint<std::uint32_t>();
    if (std::size_t{n_layers} * 22 > r.remaining()) {
        throw FormatError("QVM1 checkpoint: truncated layer table");
    }
    std::vector<LayerSpec> specs;
    for (std::uint32_t i = 0; i < n_layers; ++i) {
        LayerSpec s{};
        const auto kind = r.uint<std::uint8_t>();
        if (kind > static_cast<std::uint8_t>(LayerKind::Softmax)) {
            throw FormatError("QVM1 checkpoint: unknown layer kind " + std::to_string(kind));
        }
        s.kind = static_cast<LayerKind>(kind);
        s.units = r.uint<std::uint32_t>();
        s.kernel_h = r.uint<std::uint32_t>();
        s.kernel_w = r.uint<std::uint32_t>();
        const auto act = r.uint<std::uint8_t>();
        if (act > static_cast<std::uint8_t>(Activation::ReLU)) {
            throw FormatError("QVM1 checkpoint: unknown activation " + std::to_string(act));
        }
        s.activation = static_cast<Activation>(act);
        s.dropout_rate = r.f64();
        specs.push_back(s);
    }
    Model model = [&] {
        try {
            return Model(input_shape, specs);
        } catch (const ConfigError& e) {
            throw FormatError(std::string("QVM1 checkpoint: invalid architecture: ") + e.what());
        }
    }();
    if (model.total_parameters() * 8 != r.remaining()) {
        throw FormatError("QVM1 checkpoint: parameter block has " + std::to_string(r.remaining()) +
                          " bytes, expected " + std::to_string(model.total_parameters() * 8));
    }
    for (Tensor& t : model.params()) {
        for (auto& v : t.values()) {
            v = r.f64();
        }
    }
    r.expect_end();
    return model;
}

void save_checkpoint(const std::filesystem::path& path, const Model& model) {
    binio::write_file_atomic(path, serialize_checkpoint(model));
}

Model load_checkpoint(const std::filesystem::path& path) { return deserialize_checkpoint(binio::read_file(path)); }

}  // namespace quanvnet::nn
