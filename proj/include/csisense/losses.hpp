#pragma once

#include <vector>

#include "csisense/tensor.hpp"

namespace csisense {

// Sum over output dimensions of per-dimension mean absolute error, i.e.
// sum_d mean_n |pred - target|. grad is w.r.t. pred.
template <typename T>
T l1_loss(const TensorT<T>& pred, const TensorT<T>& target, TensorT<T>& grad);

// Mean over the batch of -log softmax(logits)[class].
template <typename T>
T cross_entropy_loss(const TensorT<T>& logits, const std::vector<int>& classes, TensorT<T>& grad);

// L = L_bio + alpha * L_id.
double joint_loss(double bio_loss, double id_loss, double alpha);

}  // namespace csisense
