#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "quanvnet/rng.h"
#include "quanvnet/tensor.h"

// Layer primitives. Feature maps are (H, W, C) tensors, convolution kernels are
// (KH, KW, Cin, Cout) and dense weights are (out, in). Backward functions
// accumulate parameter gradients into the supplied tensors.

namespace quanvnet::nn {

/// Cross-correlation, stride 1, SAME padding. For even kernels the extra padding
/// row/column goes after the input, so output(i, j) = sum K(m, n) * in(i + m, j + n).
Tensor conv2d_forward(const Tensor& input, const Tensor& kernels, const Tensor& bias);
void conv2d_backward(const Tensor& input, const Tensor& kernels, const Tensor& grad_out, Tensor* grad_input,
                     Tensor& grad_kernels, Tensor& grad_bias);

Tensor relu(const Tensor& x);
/// Passes grad_out where the forward input was strictly positive.
Tensor relu_backward(const Tensor& input, const Tensor& grad_out);

struct MaxPoolResult {
    Tensor output;
    std::vector<std::size_t> argmax;  // flat input index of each output element
};

/// 2x2 window, stride 2; a trailing odd row or column is dropped. Ties go to the first element.
MaxPoolResult maxpool2x2_forward(const Tensor& input);
Tensor maxpool2x2_backward(const Shape& input_shape, const std::vector<std::size_t>& argmax, const Tensor& grad_out);

Tensor dense_forward(const Tensor& input, const Tensor& weights, const Tensor& bias);
void dense_backward(const Tensor& input, const Tensor& weights, const Tensor& grad_out, Tensor* grad_input,
                    Tensor& grad_weights, Tensor& grad_bias);

enum class Mode { Train, Eval };

struct DropoutResult {
    Tensor output;
    std::vector<double> mask;  // 0 for dropped units, 1/(1-rate) for survivors; empty in eval mode
};

/// Inverted dropout. Eval mode and rate 0 are the identity.
DropoutResult dropout(const Tensor& input, double rate, Mode mode, Rng& rng);
Tensor dropout_backward(const std::vector<double>& mask, const Tensor& grad_out);

struct SoftmaxLoss {
    double loss;
    std::vector<double> probabilities;
};

/// Max-subtracted softmax and -log p[label]. The logit gradient is probabilities - onehot(label).
SoftmaxLoss softmax_cross_entropy(const Tensor& logits, std::size_t label);
std::vector<double> softmax(std::span<const double> logits);

}  // namespace quanvnet::nn
