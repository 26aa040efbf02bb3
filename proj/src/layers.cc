#include "quanvnet/layers.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace quanvnet::nn {

std::string shape_string(const Shape& shape) {
    std::ostringstream out;
    out << '(';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        out << (i ? "x" : "") << shape[i];
    }
    out << ')';
    return out.str();
}

namespace {

void require(bool condition, const std::string& message) {
    if (!condition) {
        throw InputError(message);
    }
}

}  // namespace

Tensor conv2d_forward(const Tensor& input, const Tensor& kernels, const Tensor& bias) {
    require(input.rank() == 3, "conv2d input must be HxWxC, got " + shape_string(input.shape()));
    require(kernels.rank() == 4, "conv2d kernels must be KHxKWxCinxCout");
    const std::size_t h = input.dim(0), w = input.dim(1), cin = input.dim(2);
    const std::size_t kh = kernels.dim(0), kw = kernels.dim(1), cout = kernels.dim(3);
    require(kernels.dim(2) == cin, "conv2d channel mismatch: input " + shape_string(input.shape()) + ", kernels " +
                                       shape_string(kernels.shape()));
    require(bias.size() == cout, "conv2d bias size mismatch");
    const std::size_t pad_top = (kh - 1) / 2, pad_left = (kw - 1) / 2;

    Tensor out({h, w, cout});
    for (std::size_t i = 0; i < h; ++i) {
        for (std::size_t j = 0; j < w; ++j) {
            double* o = out.data() + (i * w + j) * cout;
            std::copy(bias.data(), bias.data() + cout, o);
            for (std::size_t m = 0; m < kh; ++m) {
                const std::ptrdiff_t y = static_cast<std::ptrdiff_t>(i + m) - static_cast<std::ptrdiff_t>(pad_top);
                if (y < 0 || y >= static_cast<std::ptrdiff_t>(h)) continue;
                for (std::size_t n = 0; n < kw; ++n) {
                    const std::ptrdiff_t x = static_cast<std::ptrdiff_t>(j + n) - static_cast<std::ptrdiff_t>(pad_left);
                    if (x < 0 || x >= static_cast<std::ptrdiff_t>(w)) continue;
                    const double* in = input.data() + (static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x)) * cin;
                    const double* k = kernels.data() + (m * kw + n) * cin * cout;
                    for (std::size_t ci = 0; ci < cin; ++ci) {
                        const double v = in[ci];
                        const double* kc = k + ci * cout;
                        for (std::size_t co = 0; co < cout; ++co) {
                            o[co] += v * kc[co];
                        }
                    }
                }
            }
        }
    }
    return out;
}

void conv2d_backward(const Tensor& input, const Tensor& kernels, const Tensor& grad_out, Tensor* grad_input,
                     Tensor& grad_kernels, Tensor& grad_bias) {
    const std::size_t h = input.dim(0), w = input.dim(1), cin = input.dim(2);
    const std::size_t kh = kernels.dim(0), kw = kernels.dim(1), cout = kernels.dim(3);
    const std::size_t pad_top = (kh - 1) / 2, pad_left = (kw - 1) / 2;
    if (grad_input) {
        *grad_input = Tensor(input.shape());
    }
    for (std::size_t i = 0; i < h; ++i) {
        for (std::size_t j = 0; j < w; ++j) {
            const double* g = grad_out.data() + (i * w + j) * cout;
            for (std::size_t co = 0; co < cout; ++co) {
                grad_bias[co] += g[co];
            }
            for (std::size_t m = 0; m < kh; ++m) {
                const std::ptrdiff_t y = static_cast<std::ptrdiff_t>(i + m) - static_cast<std::ptrdiff_t>(pad_top);
                if (y < 0 || y >= static_cast<std::ptrdiff_t>(h)) continue;
                for (std::size_t n = 0; n < kw; ++n) {
                    const std::ptrdiff_t x = static_cast<std::ptrdiff_t>(j + n) - static_cast<std::ptrdiff_t>(pad_left);
                    if (x < 0 || x >= static_cast<std::ptrdiff_t>(w)) continue;
                    const std::size_t in_off = (static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x)) * cin;
                    const double* in = input.data() + in_off;
                    const std::size_t k_off = (m * kw + n) * cin * cout;
                    const double* k = kernels.data() + k_off;
                    double* gk = grad_kernels.data() + k_off;
                    for (std::size_t ci = 0; ci < cin; ++ci) {
                        const double v = in[ci];
                        double acc = 0;
                        for (std::size_t co = 0; co < cout; ++co) {
                            gk[ci * cout + co] += v * g[co];
                            acc += k[ci * cout + co] * g[co];
                        }
                        if (grad_input) {
                            (*grad_input)[in_off + ci] += acc;
                        }
                    }
                }
            }
        }
    }
}

Tensor relu(const Tensor& x) {
    Tensor out = x;
    for (auto& v : out.values()) {
        v = std::max(0.0, v);
    }
    return out;
}

Tensor relu_backward(const Tensor& input, const Tensor& grad_out) {
    Tensor out = grad_out;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (!(input[i] > 0)) {
            out[i] = 0;
        }
    }
    return out;
}

MaxPoolResult maxpool2x2_forward(const Tensor& input) {
    require(input.rank() == 3, "maxpool input must be HxWxC");
    const std::size_t h = input.dim(0), w = input.dim(1), c = input.dim(2);
    require(h >= 2 && w >= 2, "maxpool needs H, W >= 2, got " + shape_string(input.shape()));
    const std::size_t oh = h / 2, ow = w / 2;
    MaxPoolResult result{Tensor({oh, ow, c}), std::vector<std::size_t>(oh * ow * c)};
    for (std::size_t i = 0; i < oh; ++i) {
        for (std::size_t j = 0; j < ow; ++j) {
            for (std::size_t k = 0; k < c; ++k) {
                double best = -std::numeric_limits<double>::infinity();
                std::size_t best_index = 0;
                for (std::size_t m = 0; m < 2; ++m) {
                    for (std::size_t n = 0; n < 2; ++n) {
                        const std::size_t idx = ((2 * i + m) * w + (2 * j + n)) * c + k;
                        if (input[idx] > best) {
                            best = input[idx];
                            best_index = idx;
                        }
                    }
                }
                const std::size_t o = (i * ow + j) * c + k;
                result.output[o] = best;
                result.argmax[o] = best_index;
            }
        }
    }
    return result;
}

Tensor maxpool2x2_backward(const Shape& input_shape, const std::vector<std::size_t>& argmax, const Tensor& grad_out) {
    Tensor grad(input_shape);
    for (std::size_t o = 0; o < argmax.size(); ++o) {
        grad[argmax[o]] += grad_out[o];
    }
    return grad;
}

Tensor dense_forward(const Tensor& input, const Tensor& weights, const Tensor& bias) {
    require(weights.rank() == 2, "dense weights must be (out, in)");
    const std::size_t out_dim = weights.dim(0), in_dim = weights.dim(1);
    require(input.size() == in_dim, "dense input has " + std::to_string(input.size()) + " values, layer expects " +
                                        std::to_string(in_dim));
    require(bias.size() == out_dim, "dense bias size mismatch");
    Tensor out({out_dim});
    for (std::size_t o = 0; o < out_dim; ++o) {
        const double* row = weights.data() + o * in_dim;
        double acc = bias[o];
        for (std::size_t i = 0; i < in_dim; ++i) {
            acc += row[i] * input[i];
        }
        out[o] = acc;
    }
    return out;
}

void dense_backward(const Tensor& input, const Tensor& weights, const Tensor& grad_out, Tensor* grad_input,
                    Tensor& grad_weights, Tensor& grad_bias) {
    const std::size_t out_dim = weights.dim(0), in_dim = weights.dim(1);
    if (grad_input) {
        *grad_input = Tensor(input.shape());
    }
    for (std::size_t o = 0; o < out_dim; ++o) {
        const double g = grad_out[o];
        grad_bias[o] += g;
        if (g == 0.0) continue;
        const double* row = weights.data() + o * in_dim;
        double* grow = grad_weights.data() + o * in_dim;
        for (std::size_t i = 0; i < in_dim; ++i) {
            grow[i] += g * input[i];
        }
        if (grad_input) {
            for (std::size_t i = 0; i < in_dim; ++i) {
                (*grad_input)[i] += g * row[i];
            }
        }
    }
}

DropoutResult dropout(const Tensor& input, double rate, Mode mode, Rng& rng) {
    if (!(rate >= 0.0 && rate < 1.0)) {
        throw ConfigError("dropout rate must be in [0, 1)");
    }
    if (mode == Mode::Eval || rate == 0.0) {
        return {input, {}};
    }
    const double keep_scale = 1.0 / (1.0 - rate);
    DropoutResult result{input, std::vector<double>(input.size())};
    for (std::size_t i = 0; i < input.size(); ++i) {
        result.mask[i] = rng.bernoulli(rate) ? 0.0 : keep_scale;
        result.output[i] *= result.mask[i];
    }
    return result;
}

Tensor dropout_backward(const std::vector<double>& mask, const Tensor& grad_out) {
    if (mask.empty()) {
        return grad_out;
    }
    Tensor grad = grad_out;
    for (std::size_t i = 0; i < grad.size(); ++i) {
        grad[i] *= mask[i];
    }
    return grad;
}

std::vector<double> softmax(std::span<const double> logits) {
    const double max = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double sum = 0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - max);
        sum += p[i];
    }
    for (auto& v : p) {
        v /= sum;
    }
    return p;
}

SoftmaxLoss softmax_cross_entropy(const Tensor& logits, std::size_t label) {
    require(logits.size() >= 2, "softmax needs at least 2 classes");
    require(label < logits.size(), "label out of range");
    const auto values = logits.values();
    const double max = *std::max_element(values.begin(), values.end());
    double sum = 0;
    for (double v : values) {
        sum += std::exp(v - max);
    }
    // log-sum-exp form keeps the loss finite when p[label] underflows.
    const double loss = std::log(sum) - (values[label] - max);
    return {loss, softmax(values)};
}

}  // namespace quanvnet::nn
