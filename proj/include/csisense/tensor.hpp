#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "csisense/errors.hpp"

namespace csisense {

// Dense row-major n-dimensional array. float carries training, double backs
// the finite-difference gradient checks.
template <typename T>
class TensorT {
public:
    TensorT() = default;
    explicit TensorT(std::vector<int> shape) : shape_(std::move(shape)) {
        data_.assign(static_cast<size_t>(numel_of(shape_)), T{0});
    }

    static TensorT zeros(std::vector<int> shape) { return TensorT(std::move(shape)); }

    static TensorT full(std::vector<int> shape, T value) {
        TensorT t(std::move(shape));
        for (auto& v : t.data_) v = value;
        return t;
    }

    static int64_t numel_of(const std::vector<int>& shape) {
        int64_t n = 1;
        for (int d : shape) {
            if (d < 0) throw DomainError("negative tensor extent");
            n *= d;
        }
        return n;
    }

    const std::vector<int>& shape() const { return shape_; }
    int dim() const { return static_cast<int>(shape_.size()); }
    int extent(int i) const { return shape_[static_cast<size_t>(i)]; }
    int64_t numel() const { return static_cast<int64_t>(data_.size()); }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }
    T& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
    const T& operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }

    // NCHW accessor for the 4-d case.
    T& at4(int n, int c, int h, int w) {
        return data_[static_cast<size_t>(((static_cast<int64_t>(n) * shape_[1] + c) * shape_[2] + h) *
                                             shape_[3] +
                                         w)];
    }
    T at4(int n, int c, int h, int w) const {
        return data_[static_cast<size_t>(((static_cast<int64_t>(n) * shape_[1] + c) * shape_[2] + h) *
                                             shape_[3] +
                                         w)];
    }

    bool same_shape(const TensorT& o) const { return shape_ == o.shape_; }

    void fill(T v) {
        for (auto& x : data_) x = v;
    }

    bool all_finite() const {
        for (const auto& v : data_) {
            if (!std::isfinite(static_cast<double>(v))) return false;
        }
        return true;
    }

    template <typename U>
    TensorT<U> cast() const {
        TensorT<U> out(shape_);
        for (int64_t i = 0; i < numel(); ++i) out[i] = static_cast<U>(data_[static_cast<size_t>(i)]);
        return out;
    }

    static std::string shape_str(const std::vector<int>& s) {
        std::string out = "[";
        for (size_t i = 0; i < s.size(); ++i) {
            if (i) out += "x";
            out += std::to_string(s[i]);
        }
        return out + "]";
    }

private:
    std::vector<int> shape_;
    std::vector<T> data_;
};

using Tensor = TensorT<float>;

template <typename T>
void require_shape(const TensorT<T>& t, const std::vector<int>& shape, const char* what) {
    if (t.shape() != shape)
        throw DomainError(std::string(what) + ": expected shape " + TensorT<T>::shape_str(shape) +
                          ", got " + TensorT<T>::shape_str(t.shape()));
}

}  // namespace csisense
