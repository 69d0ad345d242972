#pragma once

#include <vector>

#include "ssrgan/tensor.hpp"

namespace ssrgan {

struct NmseResult {
    std::vector<double> per_image;
    double mean = 0.0;
    std::size_t count = 0;
};

/// ||h - h_hat||_F^2 / ||h||_F^2, accumulated in double. Both inputs are
/// expected in de-normalized [0,1] pixel space.
template <typename T>
double nmse(const Tensor<T>& h, const Tensor<T>& h_hat);

/// Mean of per-image ratios (not ratio of sums): the expectation of the
/// per-image NMSE over the set.
template <typename T>
NmseResult nmse_dataset(const std::vector<std::pair<Tensor<T>, Tensor<T>>>& pairs);

} // namespace ssrgan
