#include "ssrgan/losses.hpp"

#include "ssrgan/errors.hpp"

namespace ssrgan {

template <typename T>
Tensor<T> real_targets(std::size_t h, std::size_t w, Rng& rng) {
    Tensor<T> t(Shape{1, h, w});
    for (std::size_t i = 0; i < t.size(); ++i)
        t[i] = T(1) - T(0.1) * static_cast<T>(rng.next_double());
    return t;
}

template <typename T>
Tensor<T> real_targets_batch(std::size_t n, std::size_t h, std::size_t w, Rng& rng) {
    Tensor<T> t(Shape{n, 1, h, w});
    for (std::size_t i = 0; i < t.size(); ++i)
        t[i] = T(1) - T(0.1) * static_cast<T>(rng.next_double());
    return t;
}

template <typename T>
DiscriminatorLossNodes<T> discriminator_loss(const NodePtr<T>& d_real, const NodePtr<T>& d_fake,
                                             const Tensor<T>& targets_real) {
    check_same_shape(d_real->value, targets_real, "discriminator_loss targets");
    check_same_shape(d_real->value, d_fake->value, "discriminator_loss real/fake");
    DiscriminatorLossNodes<T> nodes;
    nodes.real = mse(d_real, make_constant(targets_real));
    nodes.fake = mse(d_fake, make_constant(Tensor<T>::zeros(d_fake->value.shape())));
    nodes.total = add(nodes.real, nodes.fake);
    return nodes;
}

template <typename T>
GeneratorLossNodes<T> generator_loss(const NodePtr<T>& h_hat, const Tensor<T>& h,
                                     const NodePtr<T>& d_fake, T adv_weight) {
    check_same_shape(h_hat->value, h, "generator_loss content");
    GeneratorLossNodes<T> nodes;
    nodes.content = mse(h_hat, make_constant(h));
    nodes.adv = mse(d_fake, make_constant(Tensor<T>::ones(d_fake->value.shape())));
    nodes.total = add(nodes.content, scalar_mul(adv_weight, nodes.adv));
    return nodes;
}

#define SSRGAN_INSTANTIATE_LOSSES(T)                                                       \
    template Tensor<T> real_targets<T>(std::size_t, std::size_t, Rng&);                    \
    template Tensor<T> real_targets_batch<T>(std::size_t, std::size_t, std::size_t, Rng&); \
    template DiscriminatorLossNodes<T> discriminator_loss<T>(                              \
        const NodePtr<T>&, const NodePtr<T>&, const Tensor<T>&);                           \
    template GeneratorLossNodes<T> generator_loss<T>(const NodePtr<T>&, const Tensor<T>&,  \
                                                     const NodePtr<T>&, T);

SSRGAN_INSTANTIATE_LOSSES(float)
SSRGAN_INSTANTIATE_LOSSES(double)

#undef SSRGAN_INSTANTIATE_LOSSES

} // namespace ssrgan
