#include "csisense/layers.hpp"

#include <cmath>

namespace csisense {

template <typename T>
void kaiming_uniform_init(TensorT<T>& w, TensorT<T>& b, int64_t fan_in, Rng& rng) {
    double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    for (int64_t i = 0; i < w.numel(); ++i) w[i] = static_cast<T>(rng.uniform(-bound, bound));
    double bias_bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (int64_t i = 0; i < b.numel(); ++i)
        b[i] = static_cast<T>(rng.uniform(-bias_bound, bias_bound));
}

template <typename T>
Conv2dT<T>::Conv2dT(std::string name, int in_ch, int out_ch, int k, int stride, int pad, Rng& rng)
    : stride(stride), pad(pad) {
    weight.name = name + ".weight";
    bias.name = name + ".bias";
    weight.value = TensorT<T>({out_ch, in_ch, k, k});
    bias.value = TensorT<T>(std::vector<int>{out_ch});
    kaiming_uniform_init(weight.value, bias.value, static_cast<int64_t>(in_ch) * k * k, rng);
    weight.zero_grad();
    bias.zero_grad();
}

template <typename T>
TensorT<T> Conv2dT<T>::forward(const TensorT<T>& x, bool) {
    x_ = x;
    return conv2d_forward(x, weight.value, bias.value, stride, pad);
}

template <typename T>
TensorT<T> Conv2dT<T>::backward(const TensorT<T>& grad_out) {
    TensorT<T> gx, gw, gb;
    conv2d_backward(x_, weight.value, grad_out, stride, pad, gx, gw, gb);
    for (int64_t i = 0; i < gw.numel(); ++i) weight.grad[i] += gw[i];
    for (int64_t i = 0; i < gb.numel(); ++i) bias.grad[i] += gb[i];
    return gx;
}

template <typename T>
std::vector<int> Conv2dT<T>::output_shape(const std::vector<int>& in) const {
    auto [oh, ow] = conv_output_hw(in[2], in[3], weight.value.extent(2), weight.value.extent(3),
                                   stride, pad);
    return {in[0], weight.value.extent(0), oh, ow};
}

template <typename T>
void Conv2dT<T>::collect_params(std::vector<ParamT<T>*>& out) {
    out.push_back(&weight);
    out.push_back(&bias);
}

template <typename T>
TConv2dT<T>::TConv2dT(std::string name, int in_ch, int out_ch, int k, int stride, int pad,
                      int output_pad, Rng& rng)
    : stride(stride), pad(pad), output_pad(output_pad) {
    weight.name = name + ".weight";
    bias.name = name + ".bias";
    weight.value = TensorT<T>({in_ch, out_ch, k, k});
    bias.value = TensorT<T>(std::vector<int>{out_ch});
    kaiming_uniform_init(weight.value, bias.value, static_cast<int64_t>(in_ch) * k * k, rng);
    weight.zero_grad();
    bias.zero_grad();
}

template <typename T>
TensorT<T> TConv2dT<T>::forward(const TensorT<T>& x, bool) {
    x_ = x;
    return tconv2d_forward(x, weight.value, bias.value, stride, pad, output_pad);
}

template <typename T>
TensorT<T> TConv2dT<T>::backward(const TensorT<T>& grad_out) {
    TensorT<T> gx, gw, gb;
    tconv2d_backward(x_, weight.value, grad_out, stride, pad, gx, gw, gb);
    for (int64_t i = 0; i < gw.numel(); ++i) weight.grad[i] += gw[i];
    for (int64_t i = 0; i < gb.numel(); ++i) bias.grad[i] += gb[i];
    return gx;
}

template <typename T>
std::vector<int> TConv2dT<T>::output_shape(const std::vector<int>& in) const {
    auto [oh, ow] = tconv_output_hw(in[2], in[3], weight.value.extent(2), weight.value.extent(3),
                                    stride, pad, output_pad);
    return {in[0], weight.value.extent(1), oh, ow};
}

template <typename T>
void TConv2dT<T>::collect_params(std::vector<ParamT<T>*>& out) {
    out.push_back(&weight);
    out.push_back(&bias);
}

template <typename T>
BatchNorm2dT<T>::BatchNorm2dT(std::string name, int channels) : name_(std::move(name)) {
    gamma.name = name_ + ".gamma";
    beta.name = name_ + ".beta";
    gamma.value = TensorT<T>::full(std::vector<int>{channels}, T{1});
    beta.value = TensorT<T>(std::vector<int>{channels});
    gamma.zero_grad();
    beta.zero_grad();
    running_mean = TensorT<T>(std::vector<int>{channels});
    running_var = TensorT<T>::full(std::vector<int>{channels}, T{1});
}

template <typename T>
TensorT<T> BatchNorm2dT<T>::forward(const TensorT<T>& x, bool train) {
    trained_forward_ = train;
    if (train)
        return batchnorm2d_train_forward(x, gamma.value, beta.value, running_mean, running_var,
                                         momentum, eps, cache_);
    return batchnorm2d_eval_forward(x, gamma.value, beta.value, running_mean, running_var, eps);
}

template <typename T>
TensorT<T> BatchNorm2dT<T>::backward(const TensorT<T>& grad_out) {
    if (!trained_forward_) throw DomainError("batch norm backward requires a train-mode forward");
    TensorT<T> gx, gg, gb;
    batchnorm2d_backward(grad_out, gamma.value, cache_, gx, gg, gb);
    for (int64_t i = 0; i < gg.numel(); ++i) gamma.grad[i] += gg[i];
    for (int64_t i = 0; i < gb.numel(); ++i) beta.grad[i] += gb[i];
    return gx;
}

template <typename T>
void BatchNorm2dT<T>::collect_params(std::vector<ParamT<T>*>& out) {
    out.push_back(&gamma);
    out.push_back(&beta);
}

template <typename T>
void BatchNorm2dT<T>::collect_buffers(std::vector<std::pair<std::string, TensorT<T>*>>& out) {
    out.emplace_back(name_ + ".running_mean", &running_mean);
    out.emplace_back(name_ + ".running_var", &running_var);
}

template <typename T>
TensorT<T> ReluT<T>::forward(const TensorT<T>& x, bool) {
    x_ = x;
    return relu_forward(x);
}

template <typename T>
TensorT<T> ReluT<T>::backward(const TensorT<T>& grad_out) {
    return relu_backward(x_, grad_out);
}

template <typename T>
LinearT<T>::LinearT(std::string name, int in_features, int out_features, Rng& rng) {
    weight.name = name + ".weight";
    bias.name = name + ".bias";
    weight.value = TensorT<T>({out_features, in_features});
    bias.value = TensorT<T>(std::vector<int>{out_features});
    kaiming_uniform_init(weight.value, bias.value, in_features, rng);
    weight.zero_grad();
    bias.zero_grad();
}

template <typename T>
TensorT<T> LinearT<T>::forward(const TensorT<T>& x, bool) {
    x_ = x;
    return linear_forward(x, weight.value, bias.value);
}

template <typename T>
TensorT<T> LinearT<T>::backward(const TensorT<T>& grad_out) {
    TensorT<T> gx, gw, gb;
    linear_backward(x_, weight.value, grad_out, gx, gw, gb);
    for (int64_t i = 0; i < gw.numel(); ++i) weight.grad[i] += gw[i];
    for (int64_t i = 0; i < gb.numel(); ++i) bias.grad[i] += gb[i];
    return gx;
}

template <typename T>
std::vector<int> LinearT<T>::output_shape(const std::vector<int>& in) const {
    return {in[0], weight.value.extent(0)};
}

template <typename T>
void LinearT<T>::collect_params(std::vector<ParamT<T>*>& out) {
    out.push_back(&weight);
    out.push_back(&bias);
}

template <typename T>
TensorT<T> BilinearResizeT<T>::forward(const TensorT<T>& x, bool) {
    x_shape_ = x.shape();
    return bilinear_resize_forward(x, out_h_, out_w_);
}

template <typename T>
TensorT<T> BilinearResizeT<T>::backward(const TensorT<T>& grad_out) {
    return bilinear_resize_backward(x_shape_, grad_out);
}

template <typename T>
std::vector<int> BilinearResizeT<T>::output_shape(const std::vector<int>& in) const {
    return {in[0], in[1], out_h_, out_w_};
}

template <typename T>
TensorT<T> MaxPool2dT<T>::forward(const TensorT<T>& x, bool) {
    x_shape_ = x.shape();
    return maxpool2d_forward(x, k_, stride_, argmax_);
}

template <typename T>
TensorT<T> MaxPool2dT<T>::backward(const TensorT<T>& grad_out) {
    return maxpool2d_backward(x_shape_, grad_out, argmax_);
}

template <typename T>
std::vector<int> MaxPool2dT<T>::output_shape(const std::vector<int>& in) const {
    auto [oh, ow] = conv_output_hw(in[2], in[3], k_, k_, stride_, 0);
    return {in[0], in[1], oh, ow};
}

template <typename T>
TensorT<T> GlobalAvgPoolT<T>::forward(const TensorT<T>& x, bool) {
    x_shape_ = x.shape();
    return global_avg_pool_forward(x);
}

template <typename T>
TensorT<T> GlobalAvgPoolT<T>::backward(const TensorT<T>& grad_out) {
    return global_avg_pool_backward(x_shape_, grad_out);
}

template <typename T>
std::vector<int> GlobalAvgPoolT<T>::output_shape(const std::vector<int>& in) const {
    return {in[0], in[1]};
}

template <typename T>
ResidualBlockT<T>::ResidualBlockT(std::string name, int in_ch, int out_ch, int stride, Rng& rng) {
    conv1_ = std::make_unique<Conv2dT<T>>(name + ".conv1", in_ch, out_ch, 3, stride, 1, rng);
    bn1_ = std::make_unique<BatchNorm2dT<T>>(name + ".bn1", out_ch);
    conv2_ = std::make_unique<Conv2dT<T>>(name + ".conv2", out_ch, out_ch, 3, 1, 1, rng);
    bn2_ = std::make_unique<BatchNorm2dT<T>>(name + ".bn2", out_ch);
    if (stride != 1 || in_ch != out_ch) {
        proj_ = std::make_unique<Conv2dT<T>>(name + ".proj", in_ch, out_ch, 1, stride, 0, rng);
        proj_bn_ = std::make_unique<BatchNorm2dT<T>>(name + ".proj_bn", out_ch);
    }
}

template <typename T>
TensorT<T> ResidualBlockT<T>::forward(const TensorT<T>& x, bool train) {
    TensorT<T> main = bn2_->forward(
        conv2_->forward(relu1_.forward(bn1_->forward(conv1_->forward(x, train), train), train),
                        train),
        train);
    TensorT<T> shortcut =
        proj_ ? proj_bn_->forward(proj_->forward(x, train), train) : x;
    sum_ = TensorT<T>(main.shape());
    for (int64_t i = 0; i < main.numel(); ++i) sum_[i] = main[i] + shortcut[i];
    return relu_forward(sum_);
}

template <typename T>
TensorT<T> ResidualBlockT<T>::backward(const TensorT<T>& grad_out) {
    TensorT<T> d_sum = relu_backward(sum_, grad_out);
    TensorT<T> d_main =
        conv1_->backward(bn1_->backward(relu1_.backward(conv2_->backward(bn2_->backward(d_sum)))));
    TensorT<T> d_short = proj_ ? proj_->backward(proj_bn_->backward(d_sum)) : d_sum;
    TensorT<T> dx(d_main.shape());
    for (int64_t i = 0; i < dx.numel(); ++i) dx[i] = d_main[i] + d_short[i];
    return dx;
}

template <typename T>
std::vector<int> ResidualBlockT<T>::output_shape(const std::vector<int>& in) const {
    return bn1_->output_shape(conv1_->output_shape(in));
}

template <typename T>
void ResidualBlockT<T>::collect_params(std::vector<ParamT<T>*>& out) {
    conv1_->collect_params(out);
    bn1_->collect_params(out);
    conv2_->collect_params(out);
    bn2_->collect_params(out);
    if (proj_) {
        proj_->collect_params(out);
        proj_bn_->collect_params(out);
    }
}

template <typename T>
void ResidualBlockT<T>::collect_buffers(std::vector<std::pair<std::string, TensorT<T>*>>& out) {
    bn1_->collect_buffers(out);
    bn2_->collect_buffers(out);
    if (proj_bn_) proj_bn_->collect_buffers(out);
}

template <typename T>
TensorT<T> SequentialT<T>::forward(const TensorT<T>& x, bool train) {
    TensorT<T> cur = x;
    for (auto& l : layers_) cur = l->forward(cur, train);
    return cur;
}

template <typename T>
TensorT<T> SequentialT<T>::backward(const TensorT<T>& grad_out) {
    TensorT<T> cur = grad_out;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) cur = (*it)->backward(cur);
    return cur;
}

template <typename T>
std::vector<int> SequentialT<T>::output_shape(const std::vector<int>& in) const {
    std::vector<int> cur = in;
    for (const auto& l : layers_) cur = l->output_shape(cur);
    return cur;
}

template <typename T>
std::vector<std::vector<int>> SequentialT<T>::shape_trace(const std::vector<int>& in) const {
    std::vector<std::vector<int>> trace;
    std::vector<int> cur = in;
    for (const auto& l : layers_) {
        cur = l->output_shape(cur);
        trace.push_back(cur);
    }
    return trace;
}

template <typename T>
void SequentialT<T>::collect_params(std::vector<ParamT<T>*>& out) {
    for (auto& l : layers_) l->collect_params(out);
}

template <typename T>
void SequentialT<T>::collect_buffers(std::vector<std::pair<std::string, TensorT<T>*>>& out) {
    for (auto& l : layers_) l->collect_buffers(out);
}

#define CSISENSE_INSTANTIATE_LAYERS(T)                                        \
    template void kaiming_uniform_init<T>(TensorT<T>&, TensorT<T>&, int64_t, Rng&); \
    template class Conv2dT<T>;                                                \
    template class TConv2dT<T>;                                               \
    template class BatchNorm2dT<T>;                                           \
    template class ReluT<T>;                                                  \
    template class LinearT<T>;                                                \
    template class BilinearResizeT<T>;                                        \
    template class MaxPool2dT<T>;                                             \
    template class GlobalAvgPoolT<T>;                                         \
    template class ResidualBlockT<T>;                                         \
    template class SequentialT<T>;

CSISENSE_INSTANTIATE_LAYERS(float)
CSISENSE_INSTANTIATE_LAYERS(double)

#undef CSISENSE_INSTANTIATE_LAYERS

}  // namespace csisense
