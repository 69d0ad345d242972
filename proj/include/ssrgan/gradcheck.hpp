#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "ssrgan/autograd.hpp"

namespace ssrgan {

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::size_t elements_checked = 0;

    bool passed(double tolerance) const { return max_rel_error < tolerance; }
};

/// Central finite-difference verification of reverse-mode gradients.
///
/// `build` must construct the scalar loss graph afresh from the given leaf
/// nodes, so that perturbing a leaf value is visible to the next forward
/// evaluation. The relative error denominator is floored so that
/// finite-difference rounding noise (~1e-10 at step 1e-5 in double) cannot
/// register as a failure on near-zero gradients.
template <typename T, typename BuildFn>
GradCheckResult check_gradients(BuildFn&& build, const std::vector<NodePtr<T>>& leaves,
                                T step = T(1e-5), double denom_floor = 1e-3) {
    zero_grads(leaves);
    NodePtr<T> root = build();
    backward(root);

    std::vector<Tensor<T>> analytic;
    analytic.reserve(leaves.size());
    for (const auto& leaf : leaves) {
        leaf->ensure_grad();
        analytic.push_back(leaf->grad);
    }

    GradCheckResult result;
    for (std::size_t li = 0; li < leaves.size(); ++li) {
        Tensor<T>& value = leaves[li]->value;
        for (std::size_t i = 0; i < value.size(); ++i) {
            const T saved = value[i];
            value[i] = saved + step;
            const double up = double(build()->value[0]);
            value[i] = saved - step;
            const double down = double(build()->value[0]);
            value[i] = saved;

            const double fd = (up - down) / (2.0 * double(step));
            const double an = double(analytic[li][i]);
            const double denom = std::max(std::abs(an) + std::abs(fd), denom_floor);
            result.max_rel_error = std::max(result.max_rel_error, std::abs(an - fd) / denom);
            result.elements_checked += 1;
        }
    }
    return result;
}

} // namespace ssrgan
