#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ssrgan/autograd.hpp"
#include "ssrgan/rng.hpp"
#include "ssrgan/tensor.hpp"

namespace ssrgan {

enum class Mode { train, eval };

// ---- raw NCHW kernels (also the surface the oracle tests compare against) ----

/// Cross-correlation with bias. x (N,Cin,H,W), w (Cout,Cin,k,k), b (Cout);
/// output (N,Cout,OH,OW) with OH = (H + 2p - k)/s + 1.
template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b,
                         std::size_t stride, std::size_t padding);
template <typename T>
Tensor<T> conv2d_grad_input(const Tensor<T>& grad_out, const Tensor<T>& w, std::size_t stride,
                            std::size_t padding, const Shape& input_shape);
template <typename T>
Tensor<T> conv2d_grad_weight(const Tensor<T>& grad_out, const Tensor<T>& x, const Shape& w_shape,
                             std::size_t stride, std::size_t padding);
template <typename T>
Tensor<T> conv2d_grad_bias(const Tensor<T>& grad_out);

/// Adjoint of conv2d. x (N,Cin,H,W), w (Cin,Cout,k,k), b (Cout);
/// output (N,Cout,OH,OW) with OH = (H-1)*s + k - 2p.
template <typename T>
Tensor<T> tconv2d_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b,
                          std::size_t stride, std::size_t padding);
template <typename T>
Tensor<T> tconv2d_grad_input(const Tensor<T>& grad_out, const Tensor<T>& w, std::size_t stride,
                             std::size_t padding, const Shape& input_shape);
template <typename T>
Tensor<T> tconv2d_grad_weight(const Tensor<T>& grad_out, const Tensor<T>& x, const Shape& w_shape,
                              std::size_t stride, std::size_t padding);

/// (N, C*r^2, H, W) -> (N, C, rH, rW):
/// out[n][c][h*r+i][w*r+j] = x[n][c*r^2 + i*r + j][h][w].
template <typename T>
Tensor<T> pixel_shuffle_forward(const Tensor<T>& x, std::size_t r);
/// Exact inverse permutation of pixel_shuffle_forward.
template <typename T>
Tensor<T> pixel_unshuffle_forward(const Tensor<T>& x, std::size_t r);

// ---- differentiable graph ops ----

template <typename T>
NodePtr<T> conv2d(const NodePtr<T>& x, const NodePtr<T>& w, const NodePtr<T>& b,
                  std::size_t stride, std::size_t padding);
template <typename T>
NodePtr<T> transpose_conv2d(const NodePtr<T>& x, const NodePtr<T>& w, const NodePtr<T>& b,
                            std::size_t stride, std::size_t padding);
template <typename T>
NodePtr<T> pixel_shuffle(const NodePtr<T>& x, std::size_t r);

/// Batch normalization over (N,H,W) per channel. Train mode normalizes with
/// batch statistics (biased variance) and folds them into the running
/// buffers with `running = momentum*running + (1-momentum)*batch`; eval mode
/// uses the running buffers. Differentiable through the batch statistics.
template <typename T>
NodePtr<T> batch_norm2d(const NodePtr<T>& x, const NodePtr<T>& gamma, const NodePtr<T>& beta,
                        Tensor<T>& running_mean, Tensor<T>& running_var, Mode mode, T momentum,
                        T eps);

// ---- layer objects: parameters plus the op wiring ----

template <typename T>
class Conv2d {
public:
    Conv2d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel,
           std::size_t stride, std::size_t padding, Rng& rng, const std::string& name);

    NodePtr<T> forward(const NodePtr<T>& x) const;
    void collect_parameters(std::vector<NodePtr<T>>& out) const;

    std::size_t in_channels, out_channels, kernel, stride, padding;
    NodePtr<T> weight; // (out, in, k, k)
    NodePtr<T> bias;   // (out)
};

template <typename T>
class TransposeConv2d {
public:
    TransposeConv2d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel,
                    std::size_t stride, std::size_t padding, Rng& rng, const std::string& name);

    NodePtr<T> forward(const NodePtr<T>& x) const;
    void collect_parameters(std::vector<NodePtr<T>>& out) const;

    std::size_t in_channels, out_channels, kernel, stride, padding;
    NodePtr<T> weight; // (in, out, k, k)
    NodePtr<T> bias;   // (out)
};

template <typename T>
class BatchNorm2d {
public:
    BatchNorm2d(std::size_t channels, const std::string& name);

    NodePtr<T> forward(const NodePtr<T>& x, Mode mode);
    void collect_parameters(std::vector<NodePtr<T>>& out) const;
    void collect_buffers(std::vector<std::pair<std::string, Tensor<T>*>>& out);

    std::size_t channels;
    T momentum = T(0.9);
    T eps = T(1e-5);
    NodePtr<T> gamma; // scale, init 1
    NodePtr<T> beta;  // shift, init 0
    Tensor<T> running_mean;
    Tensor<T> running_var;
    std::string name;
};

/// PReLU with one learnable slope per layer, initialized to 0.25.
template <typename T>
class PReLU {
public:
    explicit PReLU(const std::string& name);

    NodePtr<T> forward(const NodePtr<T>& x) const;
    void collect_parameters(std::vector<NodePtr<T>>& out) const;

    NodePtr<T> slope; // shape (1)
};

/// y = x + F(x), F = conv(k3,s1,p1) -> BN -> PReLU -> conv(k3,s1,p1) -> BN.
/// BN stages drop out when use_bn is false.
template <typename T>
class ResidualBlock {
public:
    ResidualBlock(std::size_t channels, bool use_bn, Rng& rng, const std::string& name);

    NodePtr<T> forward(const NodePtr<T>& x, Mode mode);
    void collect_parameters(std::vector<NodePtr<T>>& out) const;
    void collect_buffers(std::vector<std::pair<std::string, Tensor<T>*>>& out);

    bool use_bn;
    Conv2d<T> conv1;
    std::unique_ptr<BatchNorm2d<T>> bn1;
    PReLU<T> act;
    Conv2d<T> conv2;
    std::unique_ptr<BatchNorm2d<T>> bn2;
};

} // namespace ssrgan
