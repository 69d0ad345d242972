#pragma once

#include "ssrgan/autograd.hpp"
#include "ssrgan/rng.hpp"
#include "ssrgan/tensor.hpp"

namespace ssrgan {

/// Per-step loss values. loss_d = loss_f + loss_r by construction;
/// loss_g = loss_g_content + adv_weight * loss_g_adv.
struct LossReport {
    double loss_d = 0.0;
    double loss_f = 0.0;
    double loss_r = 0.0;
    double loss_g = 0.0;
    double loss_g_content = 0.0;
    double loss_g_adv = 0.0;
};

/// Smoothed real-sample targets 1 - 0.1*alpha, alpha ~ U[0,1) i.i.d.;
/// every value lands in (0.9, 1.0]. Shape (1,h,w).
template <typename T>
Tensor<T> real_targets(std::size_t h, std::size_t w, Rng& rng);

/// Batch variant, shape (n,1,h,w), independent alpha per sample.
template <typename T>
Tensor<T> real_targets_batch(std::size_t n, std::size_t h, std::size_t w, Rng& rng);

template <typename T>
struct DiscriminatorLossNodes {
    NodePtr<T> total; // loss_real + loss_fake
    NodePtr<T> real;  // MSE(d_real, targets)
    NodePtr<T> fake;  // MSE(d_fake, 0)
};

/// d_fake must already be detached from the generator graph; only the
/// discriminator receives gradient from this loss.
template <typename T>
DiscriminatorLossNodes<T> discriminator_loss(const NodePtr<T>& d_real, const NodePtr<T>& d_fake,
                                             const Tensor<T>& targets_real);

template <typename T>
struct GeneratorLossNodes {
    NodePtr<T> total;   // content + adv_weight * adversarial
    NodePtr<T> content; // MSE(h_hat, h)
    NodePtr<T> adv;     // MSE(d_fake, 1)
};

/// d_fake is the discriminator output on h_hat with gradient flowing back
/// through the generator.
template <typename T>
GeneratorLossNodes<T> generator_loss(const NodePtr<T>& h_hat, const Tensor<T>& h,
                                     const NodePtr<T>& d_fake, T adv_weight = T(1e-3));

} // namespace ssrgan
