#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "csisense/layers.hpp"
#include "csisense/losses.hpp"
#include "csisense/nn_ops.hpp"
#include "csisense/rng.hpp"

using namespace csisense;

// Central finite differences in f64 against the explicit backward passes.
// Every layer and loss is driven through a scalar probe L = <forward(), R>
// with a fixed random projection R, so dL/dinput comes out of backward(R).

namespace {

constexpr double kStep = 1e-5;
constexpr double kTol = 1e-5;

using Fwd = std::function<TensorT<double>()>;

double probe(const Fwd& fwd, const TensorT<double>& r) {
    auto y = fwd();
    double acc = 0.0;
    for (int64_t i = 0; i < y.numel(); ++i) acc += y[i] * r[i];
    return acc;
}

// Max relative error between analytic and finite-difference gradients over
// every coordinate of every checked tensor.
double max_rel_error(std::vector<TensorT<double>*> inputs,
                     const std::vector<TensorT<double>>& analytic, const Fwd& fwd,
                     const TensorT<double>& r) {
    double worst = 0.0;
    for (size_t t = 0; t < inputs.size(); ++t) {
        TensorT<double>& x = *inputs[t];
        for (int64_t i = 0; i < x.numel(); ++i) {
            double keep = x[i];
            x[i] = keep + kStep;
            double up = probe(fwd, r);
            x[i] = keep - kStep;
            double down = probe(fwd, r);
            x[i] = keep;
            double fd = (up - down) / (2.0 * kStep);
            double a = analytic[t][i];
            double rel = std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-3});
            worst = std::max(worst, rel);
        }
    }
    return worst;
}

TensorT<double> random_tensor(std::vector<int> shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
    TensorT<double> t(std::move(shape));
    for (int64_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform(lo, hi);
    return t;
}

// Values bounded away from zero, for kinked ops (relu, l1).
TensorT<double> random_tensor_away_from_zero(std::vector<int> shape, Rng& rng) {
    TensorT<double> t(std::move(shape));
    for (int64_t i = 0; i < t.numel(); ++i) {
        double mag = rng.uniform(0.05, 1.5);
        t[i] = rng.next_below(2) ? mag : -mag;
    }
    return t;
}

}  // namespace

TEST_CASE("gradients: conv2d") {
    Rng rng(501);
    for (int trial = 0; trial < 20; ++trial) {
        int cin = 1 + static_cast<int>(rng.next_below(3));
        int cout = 1 + static_cast<int>(rng.next_below(3));
        int h = 3 + static_cast<int>(rng.next_below(4));
        int k = 1 + static_cast<int>(rng.next_below(3));
        int stride = 1 + static_cast<int>(rng.next_below(2));
        int pad = static_cast<int>(rng.next_below(2));
        if (h + 2 * pad < k) continue;
        auto x = random_tensor({2, cin, h, h}, rng);
        auto w = random_tensor({cout, cin, k, k}, rng);
        auto b = random_tensor({cout}, rng);
        auto [oh, ow] = conv_output_hw(h, h, k, k, stride, pad);
        auto r = random_tensor({2, cout, oh, ow}, rng);

        TensorT<double> gx, gw, gb;
        conv2d_backward(x, w, r, stride, pad, gx, gw, gb);
        auto fwd = [&] { return conv2d_forward(x, w, b, stride, pad); };
        CHECK(max_rel_error({&x, &w, &b}, {gx, gw, gb}, fwd, r) < kTol);
    }
}

TEST_CASE("gradients: transposed conv2d") {
    Rng rng(502);
    for (int trial = 0; trial < 20; ++trial) {
        int cin = 1 + static_cast<int>(rng.next_below(3));
        int cout = 1 + static_cast<int>(rng.next_below(3));
        int h = 1 + static_cast<int>(rng.next_below(4));
        int k = 1 + static_cast<int>(rng.next_below(4));
        int stride = 1 + static_cast<int>(rng.next_below(3));
        int op = static_cast<int>(rng.next_below(static_cast<uint64_t>(stride)));
        int pad = static_cast<int>(rng.next_below(2));
        if ((h - 1) * stride - 2 * pad + k + op < 1) continue;
        auto x = random_tensor({2, cin, h, h}, rng);
        auto w = random_tensor({cin, cout, k, k}, rng);
        auto b = random_tensor({cout}, rng);
        auto [oh, ow] = tconv_output_hw(h, h, k, k, stride, pad, op);
        auto r = random_tensor({2, cout, oh, ow}, rng);

        TensorT<double> gx, gw, gb;
        tconv2d_backward(x, w, r, stride, pad, gx, gw, gb);
        auto fwd = [&] { return tconv2d_forward(x, w, b, stride, pad, op); };
        CHECK(max_rel_error({&x, &w, &b}, {gx, gw, gb}, fwd, r) < kTol);
    }
}

TEST_CASE("gradients: batch norm (train mode)") {
    Rng rng(503);
    for (int trial = 0; trial < 20; ++trial) {
        int c = 1 + static_cast<int>(rng.next_below(3));
        int n = 2 + static_cast<int>(rng.next_below(3));
        int h = 2 + static_cast<int>(rng.next_below(3));
        auto x = random_tensor({n, c, h, h}, rng, -2, 2);
        auto gamma = random_tensor({c}, rng, 0.5, 1.5);
        auto beta = random_tensor({c}, rng);
        auto r = random_tensor({n, c, h, h}, rng);

        BatchNormCache<double> cache;
        auto fwd = [&] {
            TensorT<double> rm(std::vector<int>{c});
            TensorT<double> rv = TensorT<double>::full(std::vector<int>{c}, 1.0);
            BatchNormCache<double> local;
            return batchnorm2d_train_forward(x, gamma, beta, rm, rv, 0.1, 1e-5, local);
        };
        {
            TensorT<double> rm(std::vector<int>{c});
            TensorT<double> rv = TensorT<double>::full(std::vector<int>{c}, 1.0);
            batchnorm2d_train_forward(x, gamma, beta, rm, rv, 0.1, 1e-5, cache);
        }
        TensorT<double> gx, gg, gb;
        batchnorm2d_backward(r, gamma, cache, gx, gg, gb);
        CHECK(max_rel_error({&x, &gamma, &beta}, {gx, gg, gb}, fwd, r) < kTol);
    }
}

TEST_CASE("gradients: relu") {
    Rng rng(504);
    for (int trial = 0; trial < 20; ++trial) {
        auto x = random_tensor_away_from_zero({3, 7}, rng);
        auto r = random_tensor({3, 7}, rng);
        auto gx = relu_backward(x, r);
        auto fwd = [&] { return relu_forward(x); };
        CHECK(max_rel_error({&x}, {gx}, fwd, r) < kTol);
    }
}

TEST_CASE("gradients: linear") {
    Rng rng(505);
    for (int trial = 0; trial < 20; ++trial) {
        int n = 2 + static_cast<int>(rng.next_below(4));
        int d = 2 + static_cast<int>(rng.next_below(6));
        int f = 1 + static_cast<int>(rng.next_below(6));
        auto x = random_tensor({n, d}, rng);
        auto w = random_tensor({f, d}, rng);
        auto b = random_tensor({f}, rng);
        auto r = random_tensor({n, f}, rng);
        TensorT<double> gx, gw, gb;
        linear_backward(x, w, r, gx, gw, gb);
        auto fwd = [&] { return linear_forward(x, w, b); };
        CHECK(max_rel_error({&x, &w, &b}, {gx, gw, gb}, fwd, r) < kTol);
    }
}

TEST_CASE("gradients: softmax") {
    Rng rng(506);
    for (int trial = 0; trial < 20; ++trial) {
        auto x = random_tensor({3, 9}, rng, -2, 2);
        auto r = random_tensor({3, 9}, rng);
        auto y = softmax_forward(x);
        auto gx = softmax_backward(y, r);
        auto fwd = [&] { return softmax_forward(x); };
        CHECK(max_rel_error({&x}, {gx}, fwd, r) < kTol);
    }
}

TEST_CASE("gradients: bilinear resize") {
    Rng rng(507);
    for (int trial = 0; trial < 20; ++trial) {
        int h = 1 + static_cast<int>(rng.next_below(4));
        int w = 1 + static_cast<int>(rng.next_below(4));
        int oh = 1 + static_cast<int>(rng.next_below(8));
        int ow = 1 + static_cast<int>(rng.next_below(8));
        auto x = random_tensor({2, 2, h, w}, rng);
        auto r = random_tensor({2, 2, oh, ow}, rng);
        auto gx = bilinear_resize_backward(x.shape(), r);
        auto fwd = [&] { return bilinear_resize_forward(x, oh, ow); };
        CHECK(max_rel_error({&x}, {gx}, fwd, r) < kTol);
    }
}

TEST_CASE("gradients: max pool") {
    Rng rng(508);
    for (int trial = 0; trial < 20; ++trial) {
        auto x = random_tensor({2, 2, 6, 6}, rng);
        std::vector<int64_t> argmax;
        auto y = maxpool2d_forward(x, 2, 2, argmax);
        auto r = random_tensor(y.shape(), rng);
        auto gx = maxpool2d_backward(x.shape(), r, argmax);
        auto fwd = [&] {
            std::vector<int64_t> am;
            return maxpool2d_forward(x, 2, 2, am);
        };
        CHECK(max_rel_error({&x}, {gx}, fwd, r) < kTol);
    }
}

TEST_CASE("gradients: global average pool") {
    Rng rng(509);
    for (int trial = 0; trial < 20; ++trial) {
        auto x = random_tensor({3, 4, 5, 5}, rng);
        auto r = random_tensor({3, 4}, rng);
        auto gx = global_avg_pool_backward(x.shape(), r);
        auto fwd = [&] { return global_avg_pool_forward(x); };
        CHECK(max_rel_error({&x}, {gx}, fwd, r) < kTol);
    }
}

TEST_CASE("gradients: l1 loss") {
    Rng rng(510);
    TensorT<double> one(std::vector<int>{1});
    one[0] = 1.0;
    for (int trial = 0; trial < 20; ++trial) {
        auto pred = random_tensor_away_from_zero({4, 4}, rng);
        auto target = random_tensor({4, 4}, rng, 2.0, 3.0);  // keeps pred - target off zero
        TensorT<double> g;
        l1_loss(pred, target, g);
        auto fwd = [&] {
            TensorT<double> tmp;
            TensorT<double> out(std::vector<int>{1});
            out[0] = l1_loss(pred, target, tmp);
            return out;
        };
        CHECK(max_rel_error({&pred}, {g}, fwd, one) < kTol);
    }
}

TEST_CASE("gradients: cross entropy loss") {
    Rng rng(511);
    TensorT<double> one(std::vector<int>{1});
    one[0] = 1.0;
    for (int trial = 0; trial < 20; ++trial) {
        int n = 3, c = 6;
        auto logits = random_tensor({n, c}, rng, -2, 2);
        std::vector<int> classes;
        for (int i = 0; i < n; ++i) classes.push_back(static_cast<int>(rng.next_below(c)));
        TensorT<double> g;
        cross_entropy_loss(logits, classes, g);
        auto fwd = [&] {
            TensorT<double> tmp;
            TensorT<double> out(std::vector<int>{1});
            out[0] = cross_entropy_loss(logits, classes, tmp);
            return out;
        };
        CHECK(max_rel_error({&logits}, {g}, fwd, one) < kTol);
    }
}

TEST_CASE("gradients: residual block end to end") {
    Rng rng(512);
    for (int trial = 0; trial < 5; ++trial) {
        Rng init(1000 + static_cast<uint64_t>(trial));
        ResidualBlockT<double> block("blk", 3, 4, 2, init);
        auto x = random_tensor({3, 3, 6, 6}, rng);
        auto out_shape = block.output_shape(x.shape());
        auto r = random_tensor(out_shape, rng);

        std::vector<ParamT<double>*> params;
        block.collect_params(params);
        for (auto* p : params) p->zero_grad();
        block.forward(x, true);
        auto gx = block.backward(r);

        std::vector<TensorT<double>*> inputs = {&x};
        std::vector<TensorT<double>> analytic = {gx};
        for (auto* p : params) {
            inputs.push_back(&p->value);
            analytic.push_back(p->grad);
        }
        auto fwd = [&] { return block.forward(x, true); };
        CHECK(max_rel_error(inputs, analytic, fwd, r) < kTol);
    }
}
