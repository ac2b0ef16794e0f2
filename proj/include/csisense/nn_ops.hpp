#pragma once

#include <utility>
#include <vector>

#include "csisense/tensor.hpp"

namespace csisense {

// Dense kernels behind the layers. All loops run in a fixed order (threads
// only ever split disjoint output ranges), so results are reproducible for
// any worker count.

// C[M,N] = A[M,K] * B[K,N]        (+= when accumulate)
template <typename T>
void gemm_nn(int m, int n, int k, const T* a, const T* b, T* c, bool accumulate);
// C[M,N] = A[K,M]^T * B[K,N]
template <typename T>
void gemm_tn(int m, int n, int k, const T* a, const T* b, T* c, bool accumulate);
// C[M,N] = A[M,K] * B[N,K]^T
template <typename T>
void gemm_nt(int m, int n, int k, const T* a, const T* b, T* c, bool accumulate);

std::pair<int, int> conv_output_hw(int h, int w, int kh, int kw, int stride, int pad);
std::pair<int, int> tconv_output_hw(int h, int w, int kh, int kw, int stride, int pad,
                                    int output_pad);

// x: [N, Cin, H, W], w: [Cout, Cin, kh, kw], b: [Cout].
template <typename T>
TensorT<T> conv2d_forward(const TensorT<T>& x, const TensorT<T>& w, const TensorT<T>& b,
                          int stride, int pad);
template <typename T>
void conv2d_backward(const TensorT<T>& x, const TensorT<T>& w, const TensorT<T>& grad_y,
                     int stride, int pad, TensorT<T>& grad_x, TensorT<T>& grad_w,
                     TensorT<T>& grad_b);

// x: [N, Cin, H, W], w: [Cin, Cout, kh, kw], b: [Cout].
template <typename T>
TensorT<T> tconv2d_forward(const TensorT<T>& x, const TensorT<T>& w, const TensorT<T>& b,
                           int stride, int pad, int output_pad);
template <typename T>
void tconv2d_backward(const TensorT<T>& x, const TensorT<T>& w, const TensorT<T>& grad_y,
                      int stride, int pad, TensorT<T>& grad_x, TensorT<T>& grad_w,
                      TensorT<T>& grad_b);

// Per-channel batch normalization over [N, C, H, W].
template <typename T>
struct BatchNormCache {
    TensorT<T> x_hat;
    std::vector<T> inv_std;  // per channel
    int64_t count = 0;       // N * H * W
};

template <typename T>
TensorT<T> batchnorm2d_train_forward(const TensorT<T>& x, const TensorT<T>& gamma,
                                     const TensorT<T>& beta, TensorT<T>& running_mean,
                                     TensorT<T>& running_var, T momentum, T eps,
                                     BatchNormCache<T>& cache);
template <typename T>
TensorT<T> batchnorm2d_eval_forward(const TensorT<T>& x, const TensorT<T>& gamma,
                                    const TensorT<T>& beta, const TensorT<T>& running_mean,
                                    const TensorT<T>& running_var, T eps);
template <typename T>
void batchnorm2d_backward(const TensorT<T>& grad_y, const TensorT<T>& gamma,
                          const BatchNormCache<T>& cache, TensorT<T>& grad_x,
                          TensorT<T>& grad_gamma, TensorT<T>& grad_beta);

template <typename T>
TensorT<T> relu_forward(const TensorT<T>& x);
template <typename T>
TensorT<T> relu_backward(const TensorT<T>& x, const TensorT<T>& grad_y);

// x: [N, D], w: [F, D], b: [F] -> [N, F].
template <typename T>
TensorT<T> linear_forward(const TensorT<T>& x, const TensorT<T>& w, const TensorT<T>& b);
template <typename T>
void linear_backward(const TensorT<T>& x, const TensorT<T>& w, const TensorT<T>& grad_y,
                     TensorT<T>& grad_x, TensorT<T>& grad_w, TensorT<T>& grad_b);

// Row-wise softmax with max subtraction; x: [N, C].
template <typename T>
TensorT<T> softmax_forward(const TensorT<T>& x);
template <typename T>
TensorT<T> softmax_backward(const TensorT<T>& y, const TensorT<T>& grad_y);

// align_corners=false bilinear resize of [N, C, H, W] to [N, C, out_h, out_w].
template <typename T>
TensorT<T> bilinear_resize_forward(const TensorT<T>& x, int out_h, int out_w);
template <typename T>
TensorT<T> bilinear_resize_backward(const std::vector<int>& x_shape, const TensorT<T>& grad_y);

template <typename T>
TensorT<T> maxpool2d_forward(const TensorT<T>& x, int k, int stride,
                             std::vector<int64_t>& argmax);
template <typename T>
TensorT<T> maxpool2d_backward(const std::vector<int>& x_shape, const TensorT<T>& grad_y,
                              const std::vector<int64_t>& argmax);

// [N, C, H, W] -> [N, C].
template <typename T>
TensorT<T> global_avg_pool_forward(const TensorT<T>& x);
template <typename T>
TensorT<T> global_avg_pool_backward(const std::vector<int>& x_shape, const TensorT<T>& grad_y);

}  // namespace csisense
