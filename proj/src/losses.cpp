#include "csisense/losses.hpp"

#include <cmath>

#include "csisense/nn_ops.hpp"

namespace csisense {

template <typename T>
T l1_loss(const TensorT<T>& pred, const TensorT<T>& target, TensorT<T>& grad) {
    if (!pred.same_shape(target))
        throw DomainError("l1 loss shape mismatch: " + TensorT<T>::shape_str(pred.shape()) +
                          " vs " + TensorT<T>::shape_str(target.shape()));
    int n = pred.extent(0);
    grad = TensorT<T>(pred.shape());
    T loss = T{0};
    T inv_n = T{1} / static_cast<T>(n);
    for (int64_t i = 0; i < pred.numel(); ++i) {
        T d = pred[i] - target[i];
        loss += std::abs(d) * inv_n;
        grad[i] = (d > T{0} ? inv_n : (d < T{0} ? -inv_n : T{0}));
    }
    return loss;
}

template <typename T>
T cross_entropy_loss(const TensorT<T>& logits, const std::vector<int>& classes, TensorT<T>& grad) {
    int n = logits.extent(0), c = logits.extent(1);
    if (static_cast<int>(classes.size()) != n)
        throw DomainError("cross entropy needs one class per row");
    for (int cls : classes) {
        if (cls < 0 || cls >= c) throw DomainError("class index out of range");
    }
    TensorT<T> probs = softmax_forward(logits);
    grad = TensorT<T>(logits.shape());
    T loss = T{0};
    T inv_n = T{1} / static_cast<T>(n);
    for (int i = 0; i < n; ++i) {
        const T* row = probs.data() + static_cast<int64_t>(i) * c;
        T* g = grad.data() + static_cast<int64_t>(i) * c;
        T p = std::max(row[classes[static_cast<size_t>(i)]], static_cast<T>(1e-30));
        loss -= std::log(p) * inv_n;
        for (int j = 0; j < c; ++j) g[j] = row[j] * inv_n;
        g[classes[static_cast<size_t>(i)]] -= inv_n;
    }
    return loss;
}

double joint_loss(double bio_loss, double id_loss, double alpha) {
    if (alpha < 0.0) throw DomainError("joint loss balance must be >= 0");
    return bio_loss + alpha * id_loss;
}

template float l1_loss<float>(const TensorT<float>&, const TensorT<float>&, TensorT<float>&);
template double l1_loss<double>(const TensorT<double>&, const TensorT<double>&, TensorT<double>&);
template float cross_entropy_loss<float>(const TensorT<float>&, const std::vector<int>&,
                                         TensorT<float>&);
template double cross_entropy_loss<double>(const TensorT<double>&, const std::vector<int>&,
                                           TensorT<double>&);

}  // namespace csisense
