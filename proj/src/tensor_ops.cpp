#include "csisense/nn_ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "csisense/parallel.hpp"

namespace csisense {

namespace {

// im2col of one image [C, H, W] into a column block of a batch matrix whose
// rows have row_stride entries; the block starts at cols.
template <typename T>
void im2col(const T* img, int c_in, int h, int w, int kh, int kw, int stride, int pad, int oh,
            int ow, T* cols, int64_t row_stride) {
    for (int c = 0; c < c_in; ++c) {
        for (int ki = 0; ki < kh; ++ki) {
            for (int kj = 0; kj < kw; ++kj) {
                T* row = cols + (static_cast<int64_t>(c) * kh * kw + ki * kw + kj) * row_stride;
                const T* plane = img + static_cast<int64_t>(c) * h * w;
                for (int oy = 0; oy < oh; ++oy) {
                    int iy = oy * stride - pad + ki;
                    T* dst = row + static_cast<int64_t>(oy) * ow;
                    if (iy < 0 || iy >= h) {
                        for (int ox = 0; ox < ow; ++ox) dst[ox] = T{0};
                        continue;
                    }
                    const T* src = plane + static_cast<int64_t>(iy) * w;
                    for (int ox = 0; ox < ow; ++ox) {
                        int ix = ox * stride - pad + kj;
                        dst[ox] = (ix >= 0 && ix < w) ? src[ix] : T{0};
                    }
                }
            }
        }
    }
}

// Scatter-add of one column block back into an image [C, H, W].
template <typename T>
void col2im(const T* cols, int c_in, int h, int w, int kh, int kw, int stride, int pad, int oh,
            int ow, T* img, int64_t row_stride) {
    for (int c = 0; c < c_in; ++c) {
        T* plane = img + static_cast<int64_t>(c) * h * w;
        for (int ki = 0; ki < kh; ++ki) {
            for (int kj = 0; kj < kw; ++kj) {
                const T* row =
                    cols + (static_cast<int64_t>(c) * kh * kw + ki * kw + kj) * row_stride;
                for (int oy = 0; oy < oh; ++oy) {
                    int iy = oy * stride - pad + ki;
                    if (iy < 0 || iy >= h) continue;
                    T* dst = plane + static_cast<int64_t>(iy) * w;
                    const T* src = row + static_cast<int64_t>(oy) * ow;
                    for (int ox = 0; ox < ow; ++ox) {
                        int ix = ox * stride - pad + kj;
                        if (ix >= 0 && ix < w) dst[ix] += src[ox];
                    }
                }
            }
        }
    }
}

// [N, C, L] -> [C, N*L] so a whole minibatch feeds one GEMM.
template <typename T>
void pack_channels(const T* src, int n, int c, int64_t l, T* dst) {
    parallel_for(c, [&](int64_t lo, int64_t hi) {
        for (int64_t ch = lo; ch < hi; ++ch) {
            for (int i = 0; i < n; ++i) {
                const T* s = src + (static_cast<int64_t>(i) * c + ch) * l;
                T* d = dst + ch * n * l + static_cast<int64_t>(i) * l;
                for (int64_t j = 0; j < l; ++j) d[j] = s[j];
            }
        }
    });
}

// [C, N*L] -> [N, C, L], optionally adding a per-channel bias.
template <typename T>
void unpack_channels(const T* src, int n, int c, int64_t l, const T* bias, T* dst) {
    parallel_for(c, [&](int64_t lo, int64_t hi) {
        for (int64_t ch = lo; ch < hi; ++ch) {
            T b = bias ? bias[ch] : T{0};
            for (int i = 0; i < n; ++i) {
                const T* s = src + ch * n * l + static_cast<int64_t>(i) * l;
                T* d = dst + (static_cast<int64_t>(i) * c + ch) * l;
                for (int64_t j = 0; j < l; ++j) d[j] = s[j] + b;
            }
        }
    });
}

}  // namespace

template <typename T>
void gemm_nn(int m, int n, int k, const T* a, const T* b, T* c, bool accumulate) {
    int64_t nn = n;
    if (!accumulate) std::fill(c, c + static_cast<int64_t>(m) * n, T{0});
    int i = 0;
    for (; i + 4 <= m; i += 4) {
        const T* a0 = a + static_cast<int64_t>(i) * k;
        const T* a1 = a0 + k;
        const T* a2 = a1 + k;
        const T* a3 = a2 + k;
        T* c0 = c + static_cast<int64_t>(i) * nn;
        T* c1 = c0 + nn;
        T* c2 = c1 + nn;
        T* c3 = c2 + nn;
        for (int kk = 0; kk < k; ++kk) {
            T v0 = a0[kk], v1 = a1[kk], v2 = a2[kk], v3 = a3[kk];
            const T* brow = b + static_cast<int64_t>(kk) * nn;
            for (int64_t j = 0; j < nn; ++j) {
                T bj = brow[j];
                c0[j] += v0 * bj;
                c1[j] += v1 * bj;
                c2[j] += v2 * bj;
                c3[j] += v3 * bj;
            }
        }
    }
    for (; i < m; ++i) {
        const T* ai = a + static_cast<int64_t>(i) * k;
        T* ci = c + static_cast<int64_t>(i) * nn;
        for (int kk = 0; kk < k; ++kk) {
            T v = ai[kk];
            const T* brow = b + static_cast<int64_t>(kk) * nn;
            for (int64_t j = 0; j < nn; ++j) ci[j] += v * brow[j];
        }
    }
}

template <typename T>
void gemm_tn(int m, int n, int k, const T* a, const T* b, T* c, bool accumulate) {
    int64_t nn = n;
    if (!accumulate) std::fill(c, c + static_cast<int64_t>(m) * n, T{0});
    for (int i = 0; i < m; ++i) {
        T* ci = c + static_cast<int64_t>(i) * nn;
        for (int kk = 0; kk < k; ++kk) {
            T v = a[static_cast<int64_t>(kk) * m + i];
            const T* brow = b + static_cast<int64_t>(kk) * nn;
            for (int64_t j = 0; j < nn; ++j) ci[j] += v * brow[j];
        }
    }
}

template <typename T>
void gemm_nt(int m, int n, int k, const T* a, const T* b, T* c, bool accumulate) {
    // Dot-product form; eight fixed-order partial accumulators keep the
    // reduction vectorizable without changing results between runs.
    for (int i = 0; i < m; ++i) {
        const T* ai = a + static_cast<int64_t>(i) * k;
        T* ci = c + static_cast<int64_t>(i) * n;
        for (int j = 0; j < n; ++j) {
            const T* bj = b + static_cast<int64_t>(j) * k;
            T acc[8] = {T{0}, T{0}, T{0}, T{0}, T{0}, T{0}, T{0}, T{0}};
            int kk = 0;
            for (; kk + 8 <= k; kk += 8) {
                for (int u = 0; u < 8; ++u) acc[u] += ai[kk + u] * bj[kk + u];
            }
            T tail = T{0};
            for (; kk < k; ++kk) tail += ai[kk] * bj[kk];
            T sum = ((acc[0] + acc[1]) + (acc[2] + acc[3])) +
                    ((acc[4] + acc[5]) + (acc[6] + acc[7])) + tail;
            if (accumulate)
                ci[j] += sum;
            else
                ci[j] = sum;
        }
    }
}

std::pair<int, int> conv_output_hw(int h, int w, int kh, int kw, int stride, int pad) {
    int oh = (h + 2 * pad - kh) / stride + 1;
    int ow = (w + 2 * pad - kw) / stride + 1;
    if (h + 2 * pad < kh || w + 2 * pad < kw || oh < 1 || ow < 1)
        throw DomainError("convolution kernel does not fit the padded input");
    return {oh, ow};
}

std::pair<int, int> tconv_output_hw(int h, int w, int kh, int kw, int stride, int pad,
                                    int output_pad) {
    if (output_pad < 0 || output_pad >= stride)
        throw DomainError("output padding must lie in [0, stride)");
    int oh = (h - 1) * stride - 2 * pad + kh + output_pad;
    int ow = (w - 1) * stride - 2 * pad + kw + output_pad;
    if (oh < 1 || ow < 1) throw DomainError("transposed convolution output would be empty");
    return {oh, ow};
}

template <typename T>
TensorT<T> conv2d_forward(const TensorT<T>& x, const TensorT<T>& w, const TensorT<T>& b,
                          int stride, int pad) {
    if (x.dim() != 4) throw DomainError("conv2d input must be 4-d [N,C,H,W]");
    int n = x.extent(0), c_in = x.extent(1), h = x.extent(2), ww = x.extent(3);
    int c_out = w.extent(0), kh = w.extent(2), kw = w.extent(3);
    if (w.extent(1) != c_in)
        throw DomainError("conv2d channel mismatch: input " + TensorT<T>::shape_str(x.shape()) +
                          " vs weight " + TensorT<T>::shape_str(w.shape()));
    auto [oh, ow] = conv_output_hw(h, ww, kh, kw, stride, pad);
    TensorT<T> y({n, c_out, oh, ow});
    int64_t ckk = static_cast<int64_t>(c_in) * kh * kw;
    int64_t l = static_cast<int64_t>(oh) * ow;
    std::vector<T> cols(static_cast<size_t>(ckk) * n * l);
    std::vector<T> out2(static_cast<size_t>(c_out) * n * l);

    parallel_for(n, [&](int64_t lo, int64_t hi) {
        for (int64_t i = lo; i < hi; ++i)
            im2col(x.data() + i * c_in * h * ww, c_in, h, ww, kh, kw, stride, pad, oh, ow,
                   cols.data() + i * l, static_cast<int64_t>(n) * l);
    });
    gemm_nn(c_out, static_cast<int>(n * l), static_cast<int>(ckk), w.data(), cols.data(),
            out2.data(), false);
    unpack_channels(out2.data(), n, c_out, l, b.data(), y.data());
    return y;
}

template <typename T>
void conv2d_backward(const TensorT<T>& x, const TensorT<T>& w, const TensorT<T>& grad_y,
                     int stride, int pad, TensorT<T>& grad_x, TensorT<T>& grad_w,
                     TensorT<T>& grad_b) {
    int n = x.extent(0), c_in = x.extent(1), h = x.extent(2), ww = x.extent(3);
    int c_out = w.extent(0), kh = w.extent(2), kw = w.extent(3);
    int oh = grad_y.extent(2), ow = grad_y.extent(3);
    grad_x = TensorT<T>(x.shape());
    grad_w = TensorT<T>(w.shape());
    grad_b = TensorT<T>(std::vector<int>{c_out});
    int64_t ckk = static_cast<int64_t>(c_in) * kh * kw;
    int64_t l = static_cast<int64_t>(oh) * ow;

    std::vector<T> dy2(static_cast<size_t>(c_out) * n * l);
    pack_channels(grad_y.data(), n, c_out, l, dy2.data());

    // grad_x: scatter of W^T * dY over the whole batch.
    std::vector<T> dcols(static_cast<size_t>(ckk) * n * l);
    gemm_tn(static_cast<int>(ckk), static_cast<int>(n * l), c_out, w.data(), dy2.data(),
            dcols.data(), false);
    parallel_for(n, [&](int64_t lo, int64_t hi) {
        for (int64_t i = lo; i < hi; ++i)
            col2im(dcols.data() + i * l, c_in, h, ww, kh, kw, stride, pad, oh, ow,
                   grad_x.data() + i * c_in * h * ww, static_cast<int64_t>(n) * l);
    });

    // grad_w: one contraction over every batch position.
    std::vector<T> cols(static_cast<size_t>(ckk) * n * l);
    parallel_for(n, [&](int64_t lo, int64_t hi) {
        for (int64_t i = lo; i < hi; ++i)
            im2col(x.data() + i * c_in * h * ww, c_in, h, ww, kh, kw, stride, pad, oh, ow,
                   cols.data() + i * l, static_cast<int64_t>(n) * l);
    });
    gemm_nt(c_out, static_cast<int>(ckk), static_cast<int>(n * l), dy2.data(), cols.data(),
            grad_w.data(), false);

    for (int co = 0; co < c_out; ++co) {
        const T* src = dy2.data() + static_cast<int64_t>(co) * n * l;
        T acc = T{0};
        for (int64_t j = 0; j < static_cast<int64_t>(n) * l; ++j) acc += src[j];
        grad_b[co] = acc;
    }
}

template <typename T>
TensorT<T> tconv2d_forward(const TensorT<T>& x, const TensorT<T>& w, const TensorT<T>& b,
                           int stride, int pad, int output_pad) {
    if (x.dim() != 4) throw DomainError("transposed conv input must be 4-d [N,C,H,W]");
    int n = x.extent(0), c_in = x.extent(1), h = x.extent(2), ww = x.extent(3);
    int c_out = w.extent(1), kh = w.extent(2), kw = w.extent(3);
    if (w.extent(0) != c_in)
        throw DomainError("transposed conv channel mismatch: input " +
                          TensorT<T>::shape_str(x.shape()) + " vs weight " +
                          TensorT<T>::shape_str(w.shape()));
    auto [oh, ow] = tconv_output_hw(h, ww, kh, kw, stride, pad, output_pad);
    TensorT<T> y({n, c_out, oh, ow});
    int64_t ckk = static_cast<int64_t>(c_out) * kh * kw;
    int64_t l = static_cast<int64_t>(h) * ww;

    std::vector<T> x2(static_cast<size_t>(c_in) * n * l);
    pack_channels(x.data(), n, c_in, l, x2.data());
    // cols = W^T [c_out*kh*kw, c_in] * x2 [c_in, n*l]
    std::vector<T> cols(static_cast<size_t>(ckk) * n * l);
    gemm_tn(static_cast<int>(ckk), static_cast<int>(n * l), c_in, w.data(), x2.data(),
            cols.data(), false);
    parallel_for(n, [&](int64_t lo, int64_t hi) {
        for (int64_t i = lo; i < hi; ++i)
            col2im(cols.data() + i * l, c_out, oh, ow, kh, kw, stride, pad, h, ww,
                   y.data() + i * c_out * oh * ow, static_cast<int64_t>(n) * l);
    });
    for (int i = 0; i < n; ++i) {
        for (int co = 0; co < c_out; ++co) {
            T bias = b[co];
            T* dst = y.data() + (static_cast<int64_t>(i) * c_out + co) * oh * ow;
            for (int64_t j = 0; j < static_cast<int64_t>(oh) * ow; ++j) dst[j] += bias;
        }
    }
    return y;
}

template <typename T>
void tconv2d_backward(const TensorT<T>& x, const TensorT<T>& w, const TensorT<T>& grad_y,
                      int stride, int pad, TensorT<T>& grad_x, TensorT<T>& grad_w,
                      TensorT<T>& grad_b) {
    int n = x.extent(0), c_in = x.extent(1), h = x.extent(2), ww = x.extent(3);
    int c_out = w.extent(1), kh = w.extent(2), kw = w.extent(3);
    int oh = grad_y.extent(2), ow = grad_y.extent(3);
    grad_x = TensorT<T>(x.shape());
    grad_w = TensorT<T>(w.shape());
    grad_b = TensorT<T>(std::vector<int>{c_out});
    int64_t ckk = static_cast<int64_t>(c_out) * kh * kw;
    int64_t l = static_cast<int64_t>(h) * ww;

    // grad_x: plain convolution of dY with the kernel, one batch GEMM.
    std::vector<T> dycols(static_cast<size_t>(ckk) * n * l);
    parallel_for(n, [&](int64_t lo, int64_t hi) {
        for (int64_t i = lo; i < hi; ++i)
            im2col(grad_y.data() + i * c_out * oh * ow, c_out, oh, ow, kh, kw, stride, pad, h, ww,
                   dycols.data() + i * l, static_cast<int64_t>(n) * l);
    });
    std::vector<T> dx2(static_cast<size_t>(c_in) * n * l);
    gemm_nn(c_in, static_cast<int>(n * l), static_cast<int>(ckk), w.data(), dycols.data(),
            dx2.data(), false);
    unpack_channels(dx2.data(), n, c_in, l, static_cast<const T*>(nullptr), grad_x.data());

    // grad_w = x2 * dycols^T over every batch position.
    std::vector<T> x2(static_cast<size_t>(c_in) * n * l);
    pack_channels(x.data(), n, c_in, l, x2.data());
    gemm_nt(c_in, static_cast<int>(ckk), static_cast<int>(n * l), x2.data(), dycols.data(),
            grad_w.data(), false);

    for (int i = 0; i < n; ++i) {
        for (int co = 0; co < c_out; ++co) {
            const T* src = grad_y.data() + (static_cast<int64_t>(i) * c_out + co) *
                                               static_cast<int64_t>(oh) * ow;
            T acc = T{0};
            for (int64_t j = 0; j < static_cast<int64_t>(oh) * ow; ++j) acc += src[j];
            grad_b[co] += acc;
        }
    }
}

template <typename T>
TensorT<T> batchnorm2d_train_forward(const TensorT<T>& x, const TensorT<T>& gamma,
                                     const TensorT<T>& beta, TensorT<T>& running_mean,
                                     TensorT<T>& running_var, T momentum, T eps,
                                     BatchNormCache<T>& cache) {
    int n = x.extent(0), c = x.extent(1), h = x.extent(2), w = x.extent(3);
    if (n < 2) throw DomainError("batch norm in train mode needs batch size > 1");
    int64_t hw = static_cast<int64_t>(h) * w;
    int64_t count = static_cast<int64_t>(n) * hw;
    TensorT<T> y(x.shape());
    cache.x_hat = TensorT<T>(x.shape());
    cache.inv_std.assign(static_cast<size_t>(c), T{0});
    cache.count = count;

    parallel_for(c, [&](int64_t lo, int64_t hi) {
        for (int64_t ch = lo; ch < hi; ++ch) {
            T mean = T{0};
            for (int i = 0; i < n; ++i) {
                const T* src = x.data() + (static_cast<int64_t>(i) * c + ch) * hw;
                for (int64_t j = 0; j < hw; ++j) mean += src[j];
            }
            mean /= static_cast<T>(count);
            T var = T{0};
            for (int i = 0; i < n; ++i) {
                const T* src = x.data() + (static_cast<int64_t>(i) * c + ch) * hw;
                for (int64_t j = 0; j < hw; ++j) {
                    T d = src[j] - mean;
                    var += d * d;
                }
            }
            var /= static_cast<T>(count);
            T inv_std = T{1} / std::sqrt(var + eps);
            cache.inv_std[static_cast<size_t>(ch)] = inv_std;
            T g = gamma[ch], bta = beta[ch];
            for (int i = 0; i < n; ++i) {
                const T* src = x.data() + (static_cast<int64_t>(i) * c + ch) * hw;
                T* xh = cache.x_hat.data() + (static_cast<int64_t>(i) * c + ch) * hw;
                T* dst = y.data() + (static_cast<int64_t>(i) * c + ch) * hw;
                for (int64_t j = 0; j < hw; ++j) {
                    xh[j] = (src[j] - mean) * inv_std;
                    dst[j] = g * xh[j] + bta;
                }
            }
            T unbiased = var * static_cast<T>(count) / static_cast<T>(count - 1);
            running_mean[ch] = (T{1} - momentum) * running_mean[ch] + momentum * mean;
            running_var[ch] = (T{1} - momentum) * running_var[ch] + momentum * unbiased;
        }
    });
    return y;
}

template <typename T>
TensorT<T> batchnorm2d_eval_forward(const TensorT<T>& x, const TensorT<T>& gamma,
                                    const TensorT<T>& beta, const TensorT<T>& running_mean,
                                    const TensorT<T>& running_var, T eps) {
    int n = x.extent(0), c = x.extent(1), h = x.extent(2), w = x.extent(3);
    int64_t hw = static_cast<int64_t>(h) * w;
    TensorT<T> y(x.shape());
    for (int64_t ch = 0; ch < c; ++ch) {
        T inv_std = T{1} / std::sqrt(running_var[ch] + eps);
        T g = gamma[ch] * inv_std;
        T bta = beta[ch] - gamma[ch] * running_mean[ch] * inv_std;
        for (int i = 0; i < n; ++i) {
            const T* src = x.data() + (static_cast<int64_t>(i) * c + ch) * hw;
            T* dst = y.data() + (static_cast<int64_t>(i) * c + ch) * hw;
            for (int64_t j = 0; j < hw; ++j) dst[j] = g * src[j] + bta;
        }
    }
    return y;
}

template <typename T>
void batchnorm2d_backward(const TensorT<T>& grad_y, const TensorT<T>& gamma,
                          const BatchNormCache<T>& cache, TensorT<T>& grad_x,
                          TensorT<T>& grad_gamma, TensorT<T>& grad_beta) {
    int n = grad_y.extent(0), c = grad_y.extent(1), h = grad_y.extent(2), w = grad_y.extent(3);
    int64_t hw = static_cast<int64_t>(h) * w;
    int64_t count = cache.count;
    grad_x = TensorT<T>(grad_y.shape());
    grad_gamma = TensorT<T>(std::vector<int>{c});
    grad_beta = TensorT<T>(std::vector<int>{c});

    parallel_for(c, [&](int64_t lo, int64_t hi) {
        for (int64_t ch = lo; ch < hi; ++ch) {
            T sum_dy = T{0}, sum_dy_xhat = T{0};
            for (int i = 0; i < n; ++i) {
                const T* dy = grad_y.data() + (static_cast<int64_t>(i) * c + ch) * hw;
                const T* xh = cache.x_hat.data() + (static_cast<int64_t>(i) * c + ch) * hw;
                for (int64_t j = 0; j < hw; ++j) {
                    sum_dy += dy[j];
                    sum_dy_xhat += dy[j] * xh[j];
                }
            }
            grad_gamma[ch] = sum_dy_xhat;
            grad_beta[ch] = sum_dy;
            T scale = gamma[ch] * cache.inv_std[static_cast<size_t>(ch)] / static_cast<T>(count);
            for (int i = 0; i < n; ++i) {
                const T* dy = grad_y.data() + (static_cast<int64_t>(i) * c + ch) * hw;
                const T* xh = cache.x_hat.data() + (static_cast<int64_t>(i) * c + ch) * hw;
                T* dx = grad_x.data() + (static_cast<int64_t>(i) * c + ch) * hw;
                for (int64_t j = 0; j < hw; ++j)
                    dx[j] = scale * (static_cast<T>(count) * dy[j] - sum_dy - xh[j] * sum_dy_xhat);
            }
        }
    });
}

template <typename T>
TensorT<T> relu_forward(const TensorT<T>& x) {
    TensorT<T> y(x.shape());
    for (int64_t i = 0; i < x.numel(); ++i) y[i] = x[i] > T{0} ? x[i] : T{0};
    return y;
}

template <typename T>
TensorT<T> relu_backward(const TensorT<T>& x, const TensorT<T>& grad_y) {
    TensorT<T> dx(x.shape());
    for (int64_t i = 0; i < x.numel(); ++i) dx[i] = x[i] > T{0} ? grad_y[i] : T{0};
    return dx;
}

template <typename T>
TensorT<T> linear_forward(const TensorT<T>& x, const TensorT<T>& w, const TensorT<T>& b) {
    if (x.dim() != 2 || x.extent(1) != w.extent(1))
        throw DomainError("linear shape mismatch: input " + TensorT<T>::shape_str(x.shape()) +
                          " vs weight " + TensorT<T>::shape_str(w.shape()));
    int n = x.extent(0), d = x.extent(1), f = w.extent(0);
    TensorT<T> y({n, f});
    gemm_nt(n, f, d, x.data(), w.data(), y.data(), false);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < f; ++j) y[static_cast<int64_t>(i) * f + j] += b[j];
    return y;
}

template <typename T>
void linear_backward(const TensorT<T>& x, const TensorT<T>& w, const TensorT<T>& grad_y,
                     TensorT<T>& grad_x, TensorT<T>& grad_w, TensorT<T>& grad_b) {
    int n = x.extent(0), d = x.extent(1), f = w.extent(0);
    grad_x = TensorT<T>({n, d});
    grad_w = TensorT<T>(w.shape());
    grad_b = TensorT<T>(std::vector<int>{f});
    gemm_nn(n, d, f, grad_y.data(), w.data(), grad_x.data(), false);
    gemm_tn(f, d, n, grad_y.data(), x.data(), grad_w.data(), false);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < f; ++j) grad_b[j] += grad_y[static_cast<int64_t>(i) * f + j];
}

template <typename T>
TensorT<T> softmax_forward(const TensorT<T>& x) {
    if (x.dim() != 2) throw DomainError("softmax input must be 2-d [N,C]");
    int n = x.extent(0), c = x.extent(1);
    TensorT<T> y(x.shape());
    for (int i = 0; i < n; ++i) {
        const T* row = x.data() + static_cast<int64_t>(i) * c;
        T* out = y.data() + static_cast<int64_t>(i) * c;
        T mx = row[0];
        for (int j = 1; j < c; ++j) mx = std::max(mx, row[j]);
        T sum = T{0};
        for (int j = 0; j < c; ++j) {
            out[j] = std::exp(row[j] - mx);
            sum += out[j];
        }
        for (int j = 0; j < c; ++j) out[j] /= sum;
    }
    return y;
}

template <typename T>
TensorT<T> softmax_backward(const TensorT<T>& y, const TensorT<T>& grad_y) {
    int n = y.extent(0), c = y.extent(1);
    TensorT<T> dx(y.shape());
    for (int i = 0; i < n; ++i) {
        const T* yr = y.data() + static_cast<int64_t>(i) * c;
        const T* dyr = grad_y.data() + static_cast<int64_t>(i) * c;
        T dot = T{0};
        for (int j = 0; j < c; ++j) dot += yr[j] * dyr[j];
        T* out = dx.data() + static_cast<int64_t>(i) * c;
        for (int j = 0; j < c; ++j) out[j] = yr[j] * (dyr[j] - dot);
    }
    return dx;
}

namespace {

struct BilinearTap {
    int i0, i1;
    double w0, w1;
};

// align_corners=false source taps along one axis.
inline BilinearTap bilinear_tap(int out_index, int in_size, int out_size) {
    double src = (out_index + 0.5) * static_cast<double>(in_size) / out_size - 0.5;
    int i0 = static_cast<int>(std::floor(src));
    double frac = src - i0;
    BilinearTap t;
    t.i0 = std::clamp(i0, 0, in_size - 1);
    t.i1 = std::clamp(i0 + 1, 0, in_size - 1);
    t.w0 = 1.0 - frac;
    t.w1 = frac;
    return t;
}

}  // namespace

template <typename T>
TensorT<T> bilinear_resize_forward(const TensorT<T>& x, int out_h, int out_w) {
    if (x.dim() != 4) throw DomainError("bilinear resize input must be 4-d");
    if (out_h < 1 || out_w < 1) throw DomainError("resize target must be >= 1");
    int n = x.extent(0), c = x.extent(1), h = x.extent(2), w = x.extent(3);
    TensorT<T> y({n, c, out_h, out_w});
    std::vector<BilinearTap> ty(static_cast<size_t>(out_h)), tx(static_cast<size_t>(out_w));
    for (int i = 0; i < out_h; ++i) ty[static_cast<size_t>(i)] = bilinear_tap(i, h, out_h);
    for (int j = 0; j < out_w; ++j) tx[static_cast<size_t>(j)] = bilinear_tap(j, w, out_w);
    parallel_for(static_cast<int64_t>(n) * c, [&](int64_t lo, int64_t hi) {
        for (int64_t p = lo; p < hi; ++p) {
            const T* src = x.data() + p * h * w;
            T* dst = y.data() + p * out_h * out_w;
            for (int oy = 0; oy < out_h; ++oy) {
                const auto& a = ty[static_cast<size_t>(oy)];
                for (int ox = 0; ox < out_w; ++ox) {
                    const auto& bb = tx[static_cast<size_t>(ox)];
                    double v = a.w0 * (bb.w0 * src[a.i0 * w + bb.i0] + bb.w1 * src[a.i0 * w + bb.i1]) +
                               a.w1 * (bb.w0 * src[a.i1 * w + bb.i0] + bb.w1 * src[a.i1 * w + bb.i1]);
                    dst[static_cast<int64_t>(oy) * out_w + ox] = static_cast<T>(v);
                }
            }
        }
    });
    return y;
}

template <typename T>
TensorT<T> bilinear_resize_backward(const std::vector<int>& x_shape, const TensorT<T>& grad_y) {
    int n = x_shape[0], c = x_shape[1], h = x_shape[2], w = x_shape[3];
    int out_h = grad_y.extent(2), out_w = grad_y.extent(3);
    TensorT<T> dx(x_shape);
    std::vector<BilinearTap> ty(static_cast<size_t>(out_h)), tx(static_cast<size_t>(out_w));
    for (int i = 0; i < out_h; ++i) ty[static_cast<size_t>(i)] = bilinear_tap(i, h, out_h);
    for (int j = 0; j < out_w; ++j) tx[static_cast<size_t>(j)] = bilinear_tap(j, w, out_w);
    parallel_for(static_cast<int64_t>(n) * c, [&](int64_t lo, int64_t hi) {
        for (int64_t p = lo; p < hi; ++p) {
            const T* dy = grad_y.data() + p * out_h * out_w;
            T* dst = dx.data() + p * h * w;
            for (int oy = 0; oy < out_h; ++oy) {
                const auto& a = ty[static_cast<size_t>(oy)];
                for (int ox = 0; ox < out_w; ++ox) {
                    const auto& bb = tx[static_cast<size_t>(ox)];
                    T g = dy[static_cast<int64_t>(oy) * out_w + ox];
                    dst[a.i0 * w + bb.i0] += static_cast<T>(a.w0 * bb.w0) * g;
                    dst[a.i0 * w + bb.i1] += static_cast<T>(a.w0 * bb.w1) * g;
                    dst[a.i1 * w + bb.i0] += static_cast<T>(a.w1 * bb.w0) * g;
                    dst[a.i1 * w + bb.i1] += static_cast<T>(a.w1 * bb.w1) * g;
                }
            }
        }
    });
    return dx;
}

template <typename T>
TensorT<T> maxpool2d_forward(const TensorT<T>& x, int k, int stride,
                             std::vector<int64_t>& argmax) {
    int n = x.extent(0), c = x.extent(1), h = x.extent(2), w = x.extent(3);
    auto [oh, ow] = conv_output_hw(h, w, k, k, stride, 0);
    TensorT<T> y({n, c, oh, ow});
    argmax.assign(static_cast<size_t>(y.numel()), 0);
    parallel_for(static_cast<int64_t>(n) * c, [&](int64_t lo, int64_t hi) {
        for (int64_t p = lo; p < hi; ++p) {
            const T* src = x.data() + p * h * w;
            T* dst = y.data() + p * oh * ow;
            int64_t* am = argmax.data() + p * oh * ow;
            for (int oy = 0; oy < oh; ++oy) {
                for (int ox = 0; ox < ow; ++ox) {
                    T best = -std::numeric_limits<T>::infinity();
                    int64_t best_idx = 0;
                    for (int ki = 0; ki < k; ++ki) {
                        for (int kj = 0; kj < k; ++kj) {
                            int iy = oy * stride + ki, ix = ox * stride + kj;
                            T v = src[static_cast<int64_t>(iy) * w + ix];
                            if (v > best) {
                                best = v;
                                best_idx = static_cast<int64_t>(iy) * w + ix;
                            }
                        }
                    }
                    dst[static_cast<int64_t>(oy) * ow + ox] = best;
                    am[static_cast<int64_t>(oy) * ow + ox] = p * h * w + best_idx;
                }
            }
        }
    });
    return y;
}

template <typename T>
TensorT<T> maxpool2d_backward(const std::vector<int>& x_shape, const TensorT<T>& grad_y,
                              const std::vector<int64_t>& argmax) {
    TensorT<T> dx(x_shape);
    for (int64_t i = 0; i < grad_y.numel(); ++i) dx[argmax[static_cast<size_t>(i)]] += grad_y[i];
    return dx;
}

template <typename T>
TensorT<T> global_avg_pool_forward(const TensorT<T>& x) {
    int n = x.extent(0), c = x.extent(1);
    int64_t hw = static_cast<int64_t>(x.extent(2)) * x.extent(3);
    TensorT<T> y({n, c});
    for (int i = 0; i < n; ++i) {
        for (int ch = 0; ch < c; ++ch) {
            const T* src = x.data() + (static_cast<int64_t>(i) * c + ch) * hw;
            T acc = T{0};
            for (int64_t j = 0; j < hw; ++j) acc += src[j];
            y[static_cast<int64_t>(i) * c + ch] = acc / static_cast<T>(hw);
        }
    }
    return y;
}

template <typename T>
TensorT<T> global_avg_pool_backward(const std::vector<int>& x_shape, const TensorT<T>& grad_y) {
    int n = x_shape[0], c = x_shape[1];
    int64_t hw = static_cast<int64_t>(x_shape[2]) * x_shape[3];
    TensorT<T> dx(x_shape);
    for (int i = 0; i < n; ++i) {
        for (int ch = 0; ch < c; ++ch) {
            T g = grad_y[static_cast<int64_t>(i) * c + ch] / static_cast<T>(hw);
            T* dst = dx.data() + (static_cast<int64_t>(i) * c + ch) * hw;
            for (int64_t j = 0; j < hw; ++j) dst[j] = g;
        }
    }
    return dx;
}

// Explicit instantiations: float for training, double for gradient checks.
#define CSISENSE_INSTANTIATE_OPS(T)                                                              \
    template void gemm_nn<T>(int, int, int, const T*, const T*, T*, bool);                       \
    template void gemm_tn<T>(int, int, int, const T*, const T*, T*, bool);                       \
    template void gemm_nt<T>(int, int, int, const T*, const T*, T*, bool);                       \
    template TensorT<T> conv2d_forward<T>(const TensorT<T>&, const TensorT<T>&,                  \
                                          const TensorT<T>&, int, int);                          \
    template void conv2d_backward<T>(const TensorT<T>&, const TensorT<T>&, const TensorT<T>&,    \
                                     int, int, TensorT<T>&, TensorT<T>&, TensorT<T>&);           \
    template TensorT<T> tconv2d_forward<T>(const TensorT<T>&, const TensorT<T>&,                 \
                                           const TensorT<T>&, int, int, int);                    \
    template void tconv2d_backward<T>(const TensorT<T>&, const TensorT<T>&, const TensorT<T>&,   \
                                      int, int, TensorT<T>&, TensorT<T>&, TensorT<T>&);          \
    template TensorT<T> batchnorm2d_train_forward<T>(const TensorT<T>&, const TensorT<T>&,       \
                                                     const TensorT<T>&, TensorT<T>&,             \
                                                     TensorT<T>&, T, T, BatchNormCache<T>&);     \
    template TensorT<T> batchnorm2d_eval_forward<T>(const TensorT<T>&, const TensorT<T>&,        \
                                                    const TensorT<T>&, const TensorT<T>&,        \
                                                    const TensorT<T>&, T);                       \
    template void batchnorm2d_backward<T>(const TensorT<T>&, const TensorT<T>&,                  \
                                          const BatchNormCache<T>&, TensorT<T>&, TensorT<T>&,    \
                                          TensorT<T>&);                                          \
    template TensorT<T> relu_forward<T>(const TensorT<T>&);                                      \
    template TensorT<T> relu_backward<T>(const TensorT<T>&, const TensorT<T>&);                  \
    template TensorT<T> linear_forward<T>(const TensorT<T>&, const TensorT<T>&,                  \
                                          const TensorT<T>&);                                    \
    template void linear_backward<T>(const TensorT<T>&, const TensorT<T>&, const TensorT<T>&,    \
                                     TensorT<T>&, TensorT<T>&, TensorT<T>&);                     \
    template TensorT<T> softmax_forward<T>(const TensorT<T>&);                                   \
    template TensorT<T> softmax_backward<T>(const TensorT<T>&, const TensorT<T>&);               \
    template TensorT<T> bilinear_resize_forward<T>(const TensorT<T>&, int, int);                 \
    template TensorT<T> bilinear_resize_backward<T>(const std::vector<int>&, const TensorT<T>&); \
    template TensorT<T> maxpool2d_forward<T>(const TensorT<T>&, int, int,                        \
                                             std::vector<int64_t>&);                             \
    template TensorT<T> maxpool2d_backward<T>(const std::vector<int>&, const TensorT<T>&,        \
                                              const std::vector<int64_t>&);                      \
    template TensorT<T> global_avg_pool_forward<T>(const TensorT<T>&);                           \
    template TensorT<T> global_avg_pool_backward<T>(const std::vector<int>&, const TensorT<T>&);

CSISENSE_INSTANTIATE_OPS(float)
CSISENSE_INSTANTIATE_OPS(double)

#undef CSISENSE_INSTANTIATE_OPS

}  // namespace csisense
