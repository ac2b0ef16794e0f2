#pragma once

#include <cstdint>
#include <vector>

#include "csisense/layers.hpp"
#include "csisense/tensor.hpp"

namespace csisense {

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// First/second moment estimates plus the shared step count.
template <typename T>
struct AdamStateT {
    TensorT<T> m;
    TensorT<T> v;
    int64_t t = 0;

    static AdamStateT for_shape(const std::vector<int>& shape) {
        AdamStateT s;
        s.m = TensorT<T>(shape);
        s.v = TensorT<T>(shape);
        return s;
    }
};

using AdamState = AdamStateT<float>;

// One bias-corrected update of a single tensor. Moments are held in double
// regardless of T so long runs do not drift in float.
template <typename T>
void adam_step(TensorT<T>& value, const TensorT<T>& grad, AdamStateT<double>& state,
               double learning_rate, const AdamConfig& cfg = {});

// Learning rate after decaying 10 percent (times 0.9) at every listed
// milestone epoch that has been reached. Epochs count from 1.
double lr_schedule(double initial_lr, int epoch,
                   const std::vector<int>& milestones = {4, 7, 10, 13, 16, 18},
                   double factor = 0.9);

// Drives adam_step across a parameter set.
class Adam {
public:
    explicit Adam(std::vector<Param*> params, AdamConfig cfg = {});
    void step(double learning_rate);
    void zero_grad();

    // Checkpoint access: one state per parameter, parameter order.
    std::vector<AdamStateT<double>>& states() { return states_; }
    const std::vector<Param*>& params() const { return params_; }
    int64_t step_count() const { return states_.empty() ? 0 : states_.front().t; }

private:
    std::vector<Param*> params_;
    std::vector<AdamStateT<double>> states_;
    AdamConfig cfg_;
};

}  // namespace csisense
