#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "quanvnet/layers.h"
#include "quanvnet/rng.h"
#include "quanvnet/tensor.h"

namespace quanvnet::nn {

enum class LayerKind : std::uint8_t { QuanvInput = 0, Conv2D = 1, MaxPool = 2, Flatten = 3, Dense = 4, Dropout = 5, Softmax = 6 };
enum class Activation : std::uint8_t { None = 0, ReLU = 1 };

std::string_view layer_kind_name(LayerKind kind);

struct LayerSpec {
    LayerKind kind;
    std::size_t units = 0;  // filters for Conv2D, outputs for Dense, channels for QuanvInput
    std::size_t kernel_h = 0;
    std::size_t kernel_w = 0;
    Activation activation = Activation::None;
    double dropout_rate = 0.0;

    static LayerSpec quanv_input(std::size_t channels) { return {LayerKind::QuanvInput, channels, 2, 2}; }
    static LayerSpec conv(std::size_t filters, Activation act = Activation::ReLU) {
        return {LayerKind::Conv2D, filters, 2, 2, act};
    }
    static LayerSpec maxpool() { return {LayerKind::MaxPool, 0, 2, 2}; }
    static LayerSpec flatten() { return {LayerKind::Flatten}; }
    static LayerSpec dense(std::size_t units, Activation act = Activation::ReLU) {
        return {LayerKind::Dense, units, 0, 0, act};
    }
    static LayerSpec dropout(double rate) { return {LayerKind::Dropout, 0, 0, 0, Activation::None, rate}; }
    static LayerSpec softmax() { return {LayerKind::Softmax}; }

    bool operator==(const LayerSpec&) const = default;
};

/// Quanv(4) -> Conv16 -> MaxPool -> Dropout -> Conv16 -> Conv32 -> MaxPool -> Dropout -> Flatten
/// -> Dense300 -> Dropout -> Dense100 -> Dropout -> Dense(num_classes) -> Softmax.
std::vector<LayerSpec> default_architecture(std::size_t num_classes, double dropout_rate = 0.2);

struct LayerParams {
    std::size_t layer;  // index into specs
    std::size_t count;  // weights + biases
};

/// Per-sample activations recorded by forward() for backward().
struct Trace {
    std::vector<Tensor> inputs;  // input of each layer
    std::vector<std::vector<std::size_t>> argmax;
    std::vector<std::vector<double>> masks;
    std::vector<Tensor> pre_activation;  // conv/dense output before ReLU
};

class Model {
   public:
    /// Validates the layer chain and allocates zero parameters. The last layer must be
    /// Softmax, preceded by a Dense layer without activation.
    Model(Shape input_shape, std::vector<LayerSpec> specs);

    static Model default_model(std::size_t num_classes, double dropout_rate = 0.2);

    const Shape& input_shape() const { return input_shape_; }
    const std::vector<LayerSpec>& specs() const { return specs_; }
    std::size_t num_classes() const { return num_classes_; }
    /// Output shape of each layer.
    const std::vector<Shape>& shapes() const { return shapes_; }

    /// Parameter tensors in declaration order: weights then bias for each Conv2D/Dense layer.
    std::vector<Tensor>& params() { return params_; }
    const std::vector<Tensor>& params() const { return params_; }
    std::vector<LayerParams> parameter_counts() const;
    std::size_t total_parameters() const;

    /// Glorot-uniform weights, zero biases.
    void initialize(std::uint64_t seed);

    /// Returns logits. In train mode dropout masks are drawn from `rng`.
    Tensor forward(const Tensor& input, Mode mode, Rng* rng = nullptr, Trace* trace = nullptr) const;
    /// Accumulates parameter gradients of a loss whose logit gradient is `grad_logits`.
    void backward(const Trace& trace, const Tensor& grad_logits, std::vector<Tensor>& grads) const;

    std::vector<Tensor> zero_grads() const;

    /// Mean softmax cross-entropy over the batch and its parameter gradients (mean over samples).
    double loss_and_gradients(const std::vector<const Tensor*>& inputs, const std::vector<std::size_t>& labels,
                              Mode mode, Rng* rng, std::vector<Tensor>& grads) const;

    /// Class probabilities for each input (eval mode).
    std::vector<std::vector<double>> predict_proba(const std::vector<Tensor>& inputs) const;

    bool operator==(const Model&) const = default;

   private:
    Shape input_shape_;
    std::vector<LayerSpec> specs_;
    std::vector<Shape> shapes_;
    std::vector<std::optional<std::size_t>> param_index_;  // first param tensor of each layer
    std::vector<Tensor> params_;
    std::size_t num_classes_ = 0;
};

/// QVM1 checkpoint, little-endian: "QVM1" | version u32 | input rank u32 + dims u32 |
/// layer count u32 | per layer: kind u8, units u32, kernel_h u32, kernel_w u32, activation u8,
/// dropout rate f64 | parameter tensors in declaration order as binary64.
std::vector<std::uint8_t> serialize_checkpoint(const Model& model);
Model deserialize_checkpoint(const std::vector<std::uint8_t>& bytes);
void save_checkpoint(const std::filesystem::path& path, const Model& model);
Model load_checkpoint(const std::filesystem::path& path);

}  // namespace quanvnet::nn
