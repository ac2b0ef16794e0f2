#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "csisense/nn_ops.hpp"
#include "csisense/rng.hpp"
#include "csisense/tensor.hpp"

namespace csisense {

template <typename T>
struct ParamT {
    std::string name;
    TensorT<T> value;
    TensorT<T> grad;

    void zero_grad() { grad = TensorT<T>(value.shape()); }
};

// Fixed-topology layers with explicit backward passes. forward caches what
// backward needs; one backward per forward.
template <typename T>
class LayerT {
public:
    virtual ~LayerT() = default;
    virtual TensorT<T> forward(const TensorT<T>& x, bool train) = 0;
    virtual TensorT<T> backward(const TensorT<T>& grad_out) = 0;
    virtual std::vector<int> output_shape(const std::vector<int>& in) const = 0;
    virtual const char* kind() const = 0;
    virtual void collect_params(std::vector<ParamT<T>*>&) {}
    virtual void collect_buffers(std::vector<std::pair<std::string, TensorT<T>*>>&) {}
};

// Kaiming-uniform fan-in initialization, bound sqrt(6 / fan_in); biases in
// +-1/sqrt(fan_in).
template <typename T>
void kaiming_uniform_init(TensorT<T>& w, TensorT<T>& b, int64_t fan_in, Rng& rng);

template <typename T>
class Conv2dT : public LayerT<T> {
public:
    Conv2dT(std::string name, int in_ch, int out_ch, int k, int stride, int pad, Rng& rng);
    TensorT<T> forward(const TensorT<T>& x, bool train) override;
    TensorT<T> backward(const TensorT<T>& grad_out) override;
    std::vector<int> output_shape(const std::vector<int>& in) const override;
    const char* kind() const override { return "conv2d"; }
    void collect_params(std::vector<ParamT<T>*>& out) override;

    ParamT<T> weight, bias;
    int stride, pad;

private:
    TensorT<T> x_;
};

template <typename T>
class TConv2dT : public LayerT<T> {
public:
    TConv2dT(std::string name, int in_ch, int out_ch, int k, int stride, int pad, int output_pad,
             Rng& rng);
    TensorT<T> forward(const TensorT<T>& x, bool train) override;
    TensorT<T> backward(const TensorT<T>& grad_out) override;
    std::vector<int> output_shape(const std::vector<int>& in) const override;
    const char* kind() const override { return "tconv2d"; }
    void collect_params(std::vector<ParamT<T>*>& out) override;

    ParamT<T> weight, bias;
    int stride, pad, output_pad;

private:
    TensorT<T> x_;
};

template <typename T>
class BatchNorm2dT : public LayerT<T> {
public:
    BatchNorm2dT(std::string name, int channels);
    TensorT<T> forward(const TensorT<T>& x, bool train) override;
    TensorT<T> backward(const TensorT<T>& grad_out) override;
    std::vector<int> output_shape(const std::vector<int>& in) const override { return in; }
    const char* kind() const override { return "batchnorm2d"; }
    void collect_params(std::vector<ParamT<T>*>& out) override;
    void collect_buffers(std::vector<std::pair<std::string, TensorT<T>*>>& out) override;

    ParamT<T> gamma, beta;
    TensorT<T> running_mean, running_var;
    T momentum = static_cast<T>(0.1);
    T eps = static_cast<T>(1e-5);

private:
    std::string name_;
    BatchNormCache<T> cache_;
    bool trained_forward_ = false;
};

template <typename T>
class ReluT : public LayerT<T> {
public:
    TensorT<T> forward(const TensorT<T>& x, bool train) override;
    TensorT<T> backward(const TensorT<T>& grad_out) override;
    std::vector<int> output_shape(const std::vector<int>& in) const override { return in; }
    const char* kind() const override { return "relu"; }

private:
    TensorT<T> x_;
};

template <typename T>
class LinearT : public LayerT<T> {
public:
    LinearT(std::string name, int in_features, int out_features, Rng& rng);
    TensorT<T> forward(const TensorT<T>& x, bool train) override;
    TensorT<T> backward(const TensorT<T>& grad_out) override;
    std::vector<int> output_shape(const std::vector<int>& in) const override;
    const char* kind() const override { return "linear"; }
    void collect_params(std::vector<ParamT<T>*>& out) override;

    ParamT<T> weight, bias;

private:
    TensorT<T> x_;
};

template <typename T>
class BilinearResizeT : public LayerT<T> {
public:
    BilinearResizeT(int out_h, int out_w) : out_h_(out_h), out_w_(out_w) {}
    TensorT<T> forward(const TensorT<T>& x, bool train) override;
    TensorT<T> backward(const TensorT<T>& grad_out) override;
    std::vector<int> output_shape(const std::vector<int>& in) const override;
    const char* kind() const override { return "bilinear_resize"; }

private:
    int out_h_, out_w_;
    std::vector<int> x_shape_;
};

template <typename T>
class MaxPool2dT : public LayerT<T> {
public:
    MaxPool2dT(int k, int stride) : k_(k), stride_(stride) {}
    TensorT<T> forward(const TensorT<T>& x, bool train) override;
    TensorT<T> backward(const TensorT<T>& grad_out) override;
    std::vector<int> output_shape(const std::vector<int>& in) const override;
    const char* kind() const override { return "maxpool2d"; }

private:
    int k_, stride_;
    std::vector<int> x_shape_;
    std::vector<int64_t> argmax_;
};

// [N, C, H, W] -> [N, C] global average pool.
template <typename T>
class GlobalAvgPoolT : public LayerT<T> {
public:
    TensorT<T> forward(const TensorT<T>& x, bool train) override;
    TensorT<T> backward(const TensorT<T>& grad_out) override;
    std::vector<int> output_shape(const std::vector<int>& in) const override;
    const char* kind() const override { return "global_avg_pool"; }

private:
    std::vector<int> x_shape_;
};

// conv-bn-relu-conv-bn + shortcut, then relu. The shortcut is a projection
// (1x1 conv + bn) whenever shape or stride changes.
template <typename T>
class ResidualBlockT : public LayerT<T> {
public:
    ResidualBlockT(std::string name, int in_ch, int out_ch, int stride, Rng& rng);
    TensorT<T> forward(const TensorT<T>& x, bool train) override;
    TensorT<T> backward(const TensorT<T>& grad_out) override;
    std::vector<int> output_shape(const std::vector<int>& in) const override;
    const char* kind() const override { return "residual_block"; }
    void collect_params(std::vector<ParamT<T>*>& out) override;
    void collect_buffers(std::vector<std::pair<std::string, TensorT<T>*>>& out) override;

private:
    std::unique_ptr<Conv2dT<T>> conv1_, conv2_, proj_;
    std::unique_ptr<BatchNorm2dT<T>> bn1_, bn2_, proj_bn_;
    ReluT<T> relu1_;
    TensorT<T> sum_;
};

template <typename T>
class SequentialT : public LayerT<T> {
public:
    void add(std::unique_ptr<LayerT<T>> layer) { layers_.push_back(std::move(layer)); }
    size_t size() const { return layers_.size(); }
    LayerT<T>* at(size_t i) { return layers_[i].get(); }

    TensorT<T> forward(const TensorT<T>& x, bool train) override;
    TensorT<T> backward(const TensorT<T>& grad_out) override;
    std::vector<int> output_shape(const std::vector<int>& in) const override;
    const char* kind() const override { return "sequential"; }
    void collect_params(std::vector<ParamT<T>*>& out) override;
    void collect_buffers(std::vector<std::pair<std::string, TensorT<T>*>>& out) override;

    // Shapes after every child layer for a given input shape.
    std::vector<std::vector<int>> shape_trace(const std::vector<int>& in) const;

private:
    std::vector<std::unique_ptr<LayerT<T>>> layers_;
};

using Layer = LayerT<float>;
using Param = ParamT<float>;
using Sequential = SequentialT<float>;

}  // namespace csisense
