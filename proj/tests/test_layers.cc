#include <gtest/gtest.h>

#include <cmath>

#include "quanvnet/errors.h"
#include "quanvnet/layers.h"

using namespace quanvnet;
using namespace quanvnet::nn;

namespace {

Tensor random_tensor(Shape shape, Rng& rng) {
    Tensor t(std::move(shape));
    for (auto& v : t.values()) v = rng.uniform(-1, 1);
    return t;
}

// Direct definition: out(i,j,o) = b(o) + sum K(m,n,c,o) in(i+m-pb, j+n-pb, c), pb = (k-1)/2.
Tensor naive_conv(const Tensor& in, const Tensor& k, const Tensor& b) {
    const std::size_t H = in.dim(0), W = in.dim(1), C = in.dim(2), KH = k.dim(0), KW = k.dim(1), O = k.dim(3);
    const long ph = static_cast<long>((KH - 1) / 2), pw = static_cast<long>((KW - 1) / 2);
    Tensor out({H, W, O});
    for (std::size_t i = 0; i < H; ++i)
        for (std::size_t j = 0; j < W; ++j)
            for (std::size_t o = 0; o < O; ++o) {
                double s = b[o];
                for (std::size_t m = 0; m < KH; ++m)
                    for (std::size_t n = 0; n < KW; ++n) {
                        const long r = static_cast<long>(i + m) - ph, c = static_cast<long>(j + n) - pw;
                        if (r < 0 || c < 0 || r >= static_cast<long>(H) || c >= static_cast<long>(W)) continue;
                        for (std::size_t ch = 0; ch < C; ++ch)
                            s += k[((m * KW + n) * C + ch) * O + o] * in[(r * W + c) * C + ch];
                    }
                out[(i * W + j) * O + o] = s;
            }
    return out;
}

double dot(const Tensor& a, const Tensor& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

TEST(Conv, HandComputedSamePadding) {
    Tensor in({3, 3, 1}, std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8, 9});
    Tensor k({2, 2, 1, 1}, std::vector<double>{1, 0, 0, 1});
    Tensor b({1}, std::vector<double>{0.5});
    const Tensor out = conv2d_forward(in, k, b);
    ASSERT_EQ(out.shape(), (Shape{3, 3, 1}));
    EXPECT_DOUBLE_EQ(out[0], 6.5);
    EXPECT_DOUBLE_EQ(out[1], 8.5);
    EXPECT_DOUBLE_EQ(out[5], 6.5);
    EXPECT_DOUBLE_EQ(out[8], 9.5);
}

TEST(Conv, MatchesDirectDefinitionForOddAndEvenKernels) {
    Rng rng(1);
    for (std::size_t kh : {1, 2, 3}) {
        for (std::size_t kw : {2, 3}) {
            const Tensor in = random_tensor({5, 4, 3}, rng), k = random_tensor({kh, kw, 3, 2}, rng),
                         b = random_tensor({2}, rng);
            const Tensor a = conv2d_forward(in, k, b), e = naive_conv(in, k, b);
            for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], e[i], 1e-12);
        }
    }
    EXPECT_THROW(conv2d_forward(random_tensor({3, 3, 2}, rng), random_tensor({2, 2, 3, 1}, rng), Tensor({1})),
                 InputError);
}

TEST(Conv, BackwardIsTheAdjointOfForward) {
    // For a linear map, <G, conv(x + d)> - <G, conv(x)> is exact, so analytic gradients can be checked tightly.
    Rng rng(2);
    const Tensor in = random_tensor({4, 5, 2}, rng), k = random_tensor({2, 3, 2, 3}, rng), b = random_tensor({3}, rng);
    const Tensor g = random_tensor({4, 5, 3}, rng);
    Tensor gi(in.shape()), gk(k.shape()), gb(b.shape());
    conv2d_backward(in, k, g, &gi, gk, gb);
    for (std::size_t i = 0; i < in.size(); ++i) {
        Tensor e(in.shape());
        e[i] = 1;
        Tensor plus = in;
        plus[i] += 1;
        EXPECT_NEAR(dot(g, conv2d_forward(plus, k, b)) - dot(g, conv2d_forward(in, k, b)), gi[i], 1e-10);
    }
    for (std::size_t i = 0; i < k.size(); ++i) {
        Tensor plus = k;
        plus[i] += 1;
        EXPECT_NEAR(dot(g, conv2d_forward(in, plus, b)) - dot(g, conv2d_forward(in, k, b)), gk[i], 1e-10);
    }
    for (std::size_t o = 0; o < 3; ++o) {
        double s = 0;
        for (std::size_t p = o; p < g.size(); p += 3) s += g[p];
        EXPECT_NEAR(gb[o], s, 1e-12);
    }
}

TEST(Dense, ForwardAndAdjoint) {
    Tensor w({2, 3}, std::vector<double>{1, 2, 3, -1, 0, 1});
    const Tensor out = dense_forward(Tensor({3}, std::vector<double>{1, 1, 2}), w, Tensor({2}, std::vector<double>{0.5, 0}));
    EXPECT_DOUBLE_EQ(out[0], 9.5);
    EXPECT_DOUBLE_EQ(out[1], 1.0);

    Rng rng(3);
    const Tensor x = random_tensor({4}, rng), W = random_tensor({3, 4}, rng), g = random_tensor({3}, rng);
    Tensor gx(x.shape()), gw(W.shape()), gb({3});
    dense_backward(x, W, g, &gx, gw, gb);
    for (std::size_t o = 0; o < 3; ++o)
        for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(gw[o * 4 + i], g[o] * x[i], 1e-15);
    for (std::size_t i = 0; i < 4; ++i) {
        double s = 0;
        for (std::size_t o = 0; o < 3; ++o) s += W[o * 4 + i] * g[o];
        EXPECT_NEAR(gx[i], s, 1e-15);
    }
}

TEST(Relu, ForwardAndBackward) {
    const Tensor x({4}, std::vector<double>{-1, 0, 2, -0.5});
    EXPECT_EQ(relu(x).values()[2], 2.0);
    EXPECT_EQ(relu(x).values()[1], 0.0);
    const Tensor g = relu_backward(x, Tensor({4}, 1.0));
    EXPECT_EQ(std::vector<double>(g.values().begin(), g.values().end()), (std::vector<double>{0, 0, 1, 0}));
}

TEST(MaxPool, WindowsTiesAndOddEdges) {
    Tensor in({5, 5, 1});
    for (std::size_t i = 0; i < 25; ++i) in[i] = static_cast<double>(i % 7);
    const MaxPoolResult r = maxpool2x2_forward(in);
    ASSERT_EQ(r.output.shape(), (Shape{2, 2, 1}));
    // Window (0,0) covers 0,1,5,6 -> values 0,1,5,6.
    EXPECT_DOUBLE_EQ(r.output[0], 6);
    EXPECT_EQ(r.argmax[0], 6u);

    const Tensor flat({2, 2, 1}, 3.0);
    EXPECT_EQ(maxpool2x2_forward(flat).argmax[0], 0u);

    const Tensor back = maxpool2x2_backward(in.shape(), r.argmax, Tensor({2, 2, 1}, std::vector<double>{1, 2, 3, 4}));
    double total = 0;
    for (double v : back.values()) total += v;
    EXPECT_DOUBLE_EQ(total, 10);
    EXPECT_DOUBLE_EQ(back[6], 1);
}

TEST(Dropout, InvertedScalingAndModes) {
    Rng rng(4);
    const Tensor x({10000}, 1.0);
    const DropoutResult eval = dropout(x, 0.2, Mode::Eval, rng);
    EXPECT_EQ(eval.output, x);
    EXPECT_TRUE(eval.mask.empty());
    EXPECT_EQ(dropout(x, 0.0, Mode::Train, rng).output, x);

    const DropoutResult train = dropout(x, 0.2, Mode::Train, rng);
    std::size_t dropped = 0;
    double sum = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        ASSERT_TRUE(train.mask[i] == 0.0 || std::abs(train.mask[i] - 1.25) < 1e-15);
        dropped += train.mask[i] == 0.0;
        sum += train.output[i];
    }
    EXPECT_NEAR(dropped / 10000.0, 0.2, 0.02);
    EXPECT_NEAR(sum / 10000.0, 1.0, 0.05);
    const Tensor g = dropout_backward(train.mask, Tensor({10000}, 2.0));
    EXPECT_DOUBLE_EQ(g[0], 2.0 * train.mask[0]);
}

TEST(Softmax, CrossEntropyAndStability) {
    const SoftmaxLoss sl = softmax_cross_entropy(Tensor({3}, std::vector<double>{1, 2, 3}), 2);
    const double z = std::exp(1) + std::exp(2) + std::exp(3);
    EXPECT_NEAR(sl.loss, -std::log(std::exp(3) / z), 1e-12);
    EXPECT_NEAR(sl.probabilities[0], std::exp(1) / z, 1e-12);

    const SoftmaxLoss big = softmax_cross_entropy(Tensor({2}, std::vector<double>{1000, 0}), 1);
    EXPECT_NEAR(big.loss, 1000.0, 1e-9);
    EXPECT_TRUE(std::isfinite(big.probabilities[1]));
    EXPECT_THROW(softmax_cross_entropy(Tensor({2}), 2), InputError);
}
