#include "csisense/optim.hpp"

#include <cmath>

namespace csisense {

template <typename T>
void adam_step(TensorT<T>& value, const TensorT<T>& grad, AdamStateT<double>& state,
               double learning_rate, const AdamConfig& cfg) {
    if (!value.same_shape(grad))
        throw DomainError("adam: gradient shape " + TensorT<T>::shape_str(grad.shape()) +
                          " does not match parameter " + TensorT<T>::shape_str(value.shape()));
    if (state.m.shape() != value.shape()) {
        state.m = TensorT<double>(value.shape());
        state.v = TensorT<double>(value.shape());
        state.t = 0;
    }
    state.t += 1;
    double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
    double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
    for (int64_t i = 0; i < value.numel(); ++i) {
        double g = static_cast<double>(grad[i]);
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
        double m_hat = state.m[i] / bc1;
        double v_hat = state.v[i] / bc2;
        value[i] = static_cast<T>(static_cast<double>(value[i]) -
                                  learning_rate * m_hat / (std::sqrt(v_hat) + cfg.eps));
    }
}

template void adam_step<float>(TensorT<float>&, const TensorT<float>&, AdamStateT<double>&,
                               double, const AdamConfig&);
template void adam_step<double>(TensorT<double>&, const TensorT<double>&, AdamStateT<double>&,
                                double, const AdamConfig&);

double lr_schedule(double initial_lr, int epoch, const std::vector<int>& milestones,
                   double factor) {
    double lr = initial_lr;
    for (int m : milestones) {
        if (m <= epoch) lr *= factor;
    }
    return lr;
}

Adam::Adam(std::vector<Param*> params, AdamConfig cfg) : params_(std::move(params)), cfg_(cfg) {
    states_.reserve(params_.size());
    for (const Param* p : params_)
        states_.push_back(AdamStateT<double>::for_shape(p->value.shape()));
}

void Adam::step(double learning_rate) {
    for (size_t i = 0; i < params_.size(); ++i)
        adam_step(params_[i]->value, params_[i]->grad, states_[i], learning_rate, cfg_);
}

void Adam::zero_grad() {
    for (Param* p : params_) p->zero_grad();
}

}  // namespace csisense
