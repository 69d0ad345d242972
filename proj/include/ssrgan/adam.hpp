#pragma once

#include <cstdint>
#include <vector>

#include "ssrgan/autograd.hpp"
#include "ssrgan/tensor.hpp"

namespace ssrgan {

/// Per-parameter Adam moments. t counts completed steps for bias correction.
template <typename T>
struct AdamState {
    Tensor<T> m;
    Tensor<T> v;
    std::int64_t t = 0;
    T beta1 = T(0.9);
    T beta2 = T(0.999);
    T eps = T(1e-8);

    static AdamState for_shape(const Shape& shape, T beta1 = T(0.9), T beta2 = T(0.999)) {
        AdamState st;
        st.m = Tensor<T>::zeros(shape);
        st.v = Tensor<T>::zeros(shape);
        st.beta1 = beta1;
        st.beta2 = beta2;
        return st;
    }
};

/// One Adam update with bias correction:
///   m <- b1*m + (1-b1)*g,  v <- b2*v + (1-b2)*g^2,
///   theta <- theta - lr * m_hat / (sqrt(v_hat) + eps).
/// Throws TrainingDivergenceError on a non-finite gradient.
template <typename T>
void adam_step(Tensor<T>& param, const Tensor<T>& grad, AdamState<T>& state, T lr);

/// Drives a fixed parameter list in lockstep; all parameters share the step
/// counter.
template <typename T>
class Adam {
public:
    Adam() = default;
    Adam(std::vector<NodePtr<T>> params, T beta1, T beta2);

    /// Applies one update from the accumulated grad slots.
    void step(T lr);
    void zero_grad();

    std::int64_t step_count() const { return t_; }
    const std::vector<NodePtr<T>>& params() const { return params_; }
    std::vector<AdamState<T>>& states() { return states_; }
    const std::vector<AdamState<T>>& states() const { return states_; }
    void set_step_count(std::int64_t t);

private:
    std::vector<NodePtr<T>> params_;
    std::vector<AdamState<T>> states_;
    std::int64_t t_ = 0;
};

} // namespace ssrgan
