// Test-only reference implementations, kept independent of the library's
// kernels: direct per-output-element summation straight from the operator
// definitions, no loop reordering, no shortcuts.
#pragma once

#include <cstddef>

#include "ssrgan/tensor.hpp"

namespace oracles {

using ssrgan::Shape;
using ssrgan::Tensor;

/// Cross-correlation, one output element at a time.
template <typename T>
Tensor<T> conv2d_reference(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b,
                           std::size_t stride, std::size_t padding) {
    const std::size_t N = x.shape()[0], Cin = x.shape()[1], H = x.shape()[2], W = x.shape()[3];
    const std::size_t Cout = w.shape()[0], K = w.shape()[2];
    const std::size_t OH = (H + 2 * padding - K) / stride + 1;
    const std::size_t OW = (W + 2 * padding - K) / stride + 1;
    Tensor<T> out(Shape{N, Cout, OH, OW});
    for (std::size_t n = 0; n < N; ++n)
        for (std::size_t oc = 0; oc < Cout; ++oc)
            for (std::size_t oh = 0; oh < OH; ++oh)
                for (std::size_t ow = 0; ow < OW; ++ow) {
                    T acc = b[oc];
                    for (std::size_t ic = 0; ic < Cin; ++ic)
                        for (std::size_t kh = 0; kh < K; ++kh)
                            for (std::size_t kw = 0; kw < K; ++kw) {
                                const long ih = long(oh * stride + kh) - long(padding);
                                const long iw = long(ow * stride + kw) - long(padding);
                                if (ih < 0 || iw < 0 || ih >= long(H) || iw >= long(W)) continue;
                                acc += x[((n * Cin + ic) * H + std::size_t(ih)) * W +
                                         std::size_t(iw)] *
                                       w[((oc * Cin + ic) * K + kh) * K + kw];
                            }
                    out[((n * Cout + oc) * OH + oh) * OW + ow] = acc;
                }
    return out;
}

/// Transposed convolution gathered per output element: output (y,x) collects
/// x[ih][iw] wherever ih*s + kh - p == y.  Weight layout (Cin, Cout, K, K).
template <typename T>
Tensor<T> tconv2d_reference(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b,
                            std::size_t stride, std::size_t padding) {
    const std::size_t N = x.shape()[0], Cin = x.shape()[1], H = x.shape()[2], W = x.shape()[3];
    const std::size_t Cout = w.shape()[1], K = w.shape()[2];
    const std::size_t OH = (H - 1) * stride + K - 2 * padding;
    const std::size_t OW = (W - 1) * stride + K - 2 * padding;
    Tensor<T> out(Shape{N, Cout, OH, OW});
    for (std::size_t n = 0; n < N; ++n)
        for (std::size_t co = 0; co < Cout; ++co)
            for (std::size_t y = 0; y < OH; ++y)
                for (std::size_t xo = 0; xo < OW; ++xo) {
                    T acc = b[co];
                    for (std::size_t ci = 0; ci < Cin; ++ci)
                        for (std::size_t kh = 0; kh < K; ++kh)
                            for (std::size_t kw = 0; kw < K; ++kw) {
                                const long num_h = long(y) + long(padding) - long(kh);
                                const long num_w = long(xo) + long(padding) - long(kw);
                                if (num_h < 0 || num_w < 0) continue;
                                if (num_h % long(stride) || num_w % long(stride)) continue;
                                const long ih = num_h / long(stride);
                                const long iw = num_w / long(stride);
                                if (ih >= long(H) || iw >= long(W)) continue;
                                acc += x[((n * Cin + ci) * H + std::size_t(ih)) * W +
                                         std::size_t(iw)] *
                                       w[((ci * Cout + co) * K + kh) * K + kw];
                            }
                    out[((n * Cout + co) * OH + y) * OW + xo] = acc;
                }
    return out;
}

template <typename T>
double inner_product(const Tensor<T>& a, const Tensor<T>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += double(a[i]) * double(b[i]);
    return acc;
}

template <typename T>
double max_abs_diff(const Tensor<T>& a, const Tensor<T>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(double(a[i]) - double(b[i])));
    return m;
}

} // namespace oracles
