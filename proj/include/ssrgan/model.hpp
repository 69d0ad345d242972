#pragma once

#include <memory>
#include <string>
#include <vector>

#include "ssrgan/layers.hpp"

namespace ssrgan {

struct GeneratorConfig {
    std::size_t channels = 3;       // image channels in and out
    std::size_t width = 64;         // trunk feature width
    std::size_t res_blocks = 6;     // residual blocks in the trunk
    std::size_t shuffle_stages = 2; // pixel-shuffle x2 stages; tail stride undoes them
    bool use_bn = true;

    /// Tail conv stride; 2^stages so the k9 tail restores the input size.
    std::size_t tail_stride() const { return std::size_t(1) << shuffle_stages; }
    void validate() const; // throws ConfigError
};

struct DiscriminatorConfig {
    std::size_t in_channels = 3;
    std::vector<std::size_t> block_channels = {64, 128, 256, 512};
    std::vector<std::size_t> block_strides = {2, 2, 1, 1};
    bool use_bn = true; // BN in every block but the first
    std::size_t head_kernel = 4;
    std::size_t head_stride = 4;

    std::size_t total_downsample() const;
    void validate() const; // throws ConfigError
};

/// Ordered composition of layers with named parameters and stat buffers.
template <typename T>
class Network {
public:
    virtual ~Network() = default;
    virtual NodePtr<T> forward(const NodePtr<T>& x, Mode mode) = 0;
    virtual std::vector<NodePtr<T>> parameters() const = 0;
    virtual std::vector<std::pair<std::string, Tensor<T>*>> buffers() = 0;
};

/// Plain-tensor forward; wraps the input as a constant so no graph survives.
template <typename T>
Tensor<T> forward_tensor(Network<T>& net, const Tensor<T>& x, Mode mode);

/// Inpainting generator: conv k9/s1 + PReLU head, res-block trunk with a
/// skip from the head, pixel-shuffle upsampling stages, conv k9 tail whose
/// stride undoes the upsampling, tanh output in [-1,1].
template <typename T>
class Generator : public Network<T> {
public:
    Generator(const GeneratorConfig& cfg, Rng& rng);

    NodePtr<T> forward(const NodePtr<T>& x, Mode mode) override;
    std::vector<NodePtr<T>> parameters() const override;
    std::vector<std::pair<std::string, Tensor<T>*>> buffers() override;

    const GeneratorConfig& config() const { return cfg_; }

private:
    GeneratorConfig cfg_;
    Conv2d<T> head_conv_;
    PReLU<T> head_act_;
    std::vector<ResidualBlock<T>> blocks_;
    Conv2d<T> trunk_conv_;
    std::unique_ptr<BatchNorm2d<T>> trunk_bn_;
    struct UpStage {
        Conv2d<T> conv;
        PReLU<T> act;
    };
    std::vector<UpStage> stages_;
    Conv2d<T> tail_conv_;
};

/// Four conv blocks 64..512 channels (strides 2,2,1,1), LeakyReLU(0.2),
/// BN from the second block on, and a transpose-conv k4/s4 head + sigmoid
/// producing a per-pixel score map the same size as the input.
template <typename T>
class Discriminator : public Network<T> {
public:
    Discriminator(const DiscriminatorConfig& cfg, Rng& rng);

    NodePtr<T> forward(const NodePtr<T>& x, Mode mode) override;
    std::vector<NodePtr<T>> parameters() const override;
    std::vector<std::pair<std::string, Tensor<T>*>> buffers() override;

    const DiscriminatorConfig& config() const { return cfg_; }

private:
    DiscriminatorConfig cfg_;
    struct Block {
        Conv2d<T> conv;
        std::unique_ptr<BatchNorm2d<T>> bn;
    };
    std::vector<Block> blocks_;
    TransposeConv2d<T> head_;
};

/// Total element count across a parameter set.
template <typename T>
std::size_t parameter_count(const std::vector<NodePtr<T>>& params);

} // namespace ssrgan
