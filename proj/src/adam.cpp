#include "ssrgan/adam.hpp"

#include <cmath>

#include "ssrgan/errors.hpp"

namespace ssrgan {

template <typename T>
void adam_step(Tensor<T>& param, const Tensor<T>& grad, AdamState<T>& state, T lr) {
    check_same_shape(param, grad, "adam_step");
    check_same_shape(param, state.m, "adam_step (m)");
    check_same_shape(param, state.v, "adam_step (v)");
    if (!(lr > T(0))) throw ValueError("adam_step: lr must be positive");
    if (!all_finite(grad))
        throw TrainingDivergenceError("adam_step: non-finite gradient" +
                                      (param.size() ? " (first element " +
                                       std::to_string(static_cast<double>(grad[0])) + ")" : ""));

    state.t += 1;
    const T b1 = state.beta1, b2 = state.beta2;
    const T bc1 = T(1) - static_cast<T>(std::pow(static_cast<double>(b1), state.t));
    const T bc2 = T(1) - static_cast<T>(std::pow(static_cast<double>(b2), state.t));
    for (std::size_t i = 0; i < param.size(); ++i) {
        const T g = grad[i];
        state.m[i] = b1 * state.m[i] + (T(1) - b1) * g;
        state.v[i] = b2 * state.v[i] + (T(1) - b2) * g * g;
        const T m_hat = state.m[i] / bc1;
        const T v_hat = state.v[i] / bc2;
        param[i] -= lr * m_hat / (std::sqrt(v_hat) + state.eps);
    }
}

template <typename T>
Adam<T>::Adam(std::vector<NodePtr<T>> params, T beta1, T beta2) : params_(std::move(params)) {
    states_.reserve(params_.size());
    for (const auto& p : params_)
        states_.push_back(AdamState<T>::for_shape(p->value.shape(), beta1, beta2));
}

template <typename T>
void Adam<T>::step(T lr) {
    for (std::size_t i = 0; i < params_.size(); ++i) {
        auto& p = *params_[i];
        p.ensure_grad();
        adam_step(p.value, p.grad, states_[i], lr);
    }
    t_ += 1;
}

template <typename T>
void Adam<T>::zero_grad() {
    zero_grads(params_);
}

template <typename T>
void Adam<T>::set_step_count(std::int64_t t) {
    t_ = t;
    for (auto& st : states_) st.t = t;
}

template void adam_step<float>(Tensor<float>&, const Tensor<float>&, AdamState<float>&, float);
template void adam_step<double>(Tensor<double>&, const Tensor<double>&, AdamState<double>&, double);
template class Adam<float>;
template class Adam<double>;

} // namespace ssrgan
