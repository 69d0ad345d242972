#include "ssrgan/model.hpp"

#include "ssrgan/errors.hpp"

namespace ssrgan {

void GeneratorConfig::validate() const {
    if (channels == 0) throw ConfigError("generator: channels must be positive");
    if (width == 0) throw ConfigError("generator: width must be positive");
    if (res_blocks < 1) throw ConfigError("generator: at least one residual block");
    if (shuffle_stages < 1 || shuffle_stages > 4)
        throw ConfigError("generator: shuffle_stages must be in [1,4]");
}

std::size_t DiscriminatorConfig::total_downsample() const {
    std::size_t d = 1;
    for (std::size_t s : block_strides) d *= s;
    return d;
}

void DiscriminatorConfig::validate() const {
    if (in_channels == 0) throw ConfigError("discriminator: in_channels must be positive");
    if (block_channels.empty() || block_channels.size() != block_strides.size())
        throw ConfigError("discriminator: channel/stride ladders must match and be nonempty");
    for (std::size_t s : block_strides)
        if (s == 0) throw ConfigError("discriminator: zero stride");
    // the transpose head must exactly undo the block downsampling
    if (total_downsample() != head_stride || head_kernel != head_stride)
        throw ConfigError("discriminator: head k" + std::to_string(head_kernel) + "/s" +
                          std::to_string(head_stride) + " does not undo downsample x" +
                          std::to_string(total_downsample()));
}

template <typename T>
Tensor<T> forward_tensor(Network<T>& net, const Tensor<T>& x, Mode mode) {
    return net.forward(make_constant(x), mode)->value;
}

// ---- generator ----

template <typename T>
Generator<T>::Generator(const GeneratorConfig& cfg, Rng& rng)
    : cfg_((cfg.validate(), cfg)),
      head_conv_(cfg.channels, cfg.width, 9, 1, 4, rng, "g.head"),
      head_act_("g.head.act"),
      trunk_conv_(cfg.width, cfg.width, 3, 1, 1, rng, "g.trunk"),
      tail_conv_(cfg.width, cfg.channels, 9, cfg.tail_stride(), 4, rng, "g.tail") {
    blocks_.reserve(cfg.res_blocks);
    for (std::size_t i = 0; i < cfg.res_blocks; ++i)
        blocks_.emplace_back(cfg.width, cfg.use_bn, rng, "g.res" + std::to_string(i));
    if (cfg.use_bn) trunk_bn_ = std::make_unique<BatchNorm2d<T>>(cfg.width, "g.trunk.bn");
    stages_.reserve(cfg.shuffle_stages);
    for (std::size_t i = 0; i < cfg.shuffle_stages; ++i)
        stages_.push_back(UpStage{
            Conv2d<T>(cfg.width, cfg.width * 4, 3, 1, 1, rng, "g.up" + std::to_string(i)),
            PReLU<T>("g.up" + std::to_string(i) + ".act")});
}

template <typename T>
NodePtr<T> Generator<T>::forward(const NodePtr<T>& x, Mode mode) {
    if (x->value.rank() != 4 || x->value.shape()[1] != cfg_.channels)
        throw ShapeError("generator: expected (N," + std::to_string(cfg_.channels) +
                         ",H,W) input, got " + shape_str(x->value.shape()));
    const std::size_t H = x->value.shape()[2], W = x->value.shape()[3];
    const std::size_t div = cfg_.tail_stride();
    if (H < 8 || W < 8 || H % div != 0 || W % div != 0)
        throw ShapeError("generator: spatial extents must be >= 8 and divisible by " +
                         std::to_string(div) + ", got " + shape_str(x->value.shape()));

    NodePtr<T> entry = head_act_.forward(head_conv_.forward(x));
    NodePtr<T> h = entry;
    for (auto& block : blocks_) h = block.forward(h, mode);
    h = trunk_conv_.forward(h);
    if (trunk_bn_) h = trunk_bn_->forward(h, mode);
    h = add(entry, h); // skip from the trunk entry
    for (auto& stage : stages_) {
        h = stage.conv.forward(h);
        h = pixel_shuffle(h, 2);
        h = stage.act.forward(h);
    }
    h = tail_conv_.forward(h);
    return tanh_op(h);
}

template <typename T>
std::vector<NodePtr<T>> Generator<T>::parameters() const {
    std::vector<NodePtr<T>> out;
    head_conv_.collect_parameters(out);
    head_act_.collect_parameters(out);
    for (const auto& block : blocks_) block.collect_parameters(out);
    trunk_conv_.collect_parameters(out);
    if (trunk_bn_) trunk_bn_->collect_parameters(out);
    for (const auto& stage : stages_) {
        stage.conv.collect_parameters(out);
        stage.act.collect_parameters(out);
    }
    tail_conv_.collect_parameters(out);
    return out;
}

template <typename T>
std::vector<std::pair<std::string, Tensor<T>*>> Generator<T>::buffers() {
    std::vector<std::pair<std::string, Tensor<T>*>> out;
    for (auto& block : blocks_) block.collect_buffers(out);
    if (trunk_bn_) trunk_bn_->collect_buffers(out);
    return out;
}

// ---- discriminator ----

template <typename T>
Discriminator<T>::Discriminator(const DiscriminatorConfig& cfg, Rng& rng)
    : cfg_((cfg.validate(), cfg)),
      head_(cfg.block_channels.back(), 1, cfg.head_kernel, cfg.head_stride, 0, rng, "d.head") {
    std::size_t in = cfg.in_channels;
    for (std::size_t i = 0; i < cfg.block_channels.size(); ++i) {
        const std::string name = "d.b" + std::to_string(i + 1);
        Block block{Conv2d<T>(in, cfg.block_channels[i], 3, cfg.block_strides[i], 1, rng,
                              name + ".conv"),
                    nullptr};
        if (cfg.use_bn && i > 0)
            block.bn = std::make_unique<BatchNorm2d<T>>(cfg.block_channels[i], name + ".bn");
        blocks_.push_back(std::move(block));
        in = cfg.block_channels[i];
    }
}

template <typename T>
NodePtr<T> Discriminator<T>::forward(const NodePtr<T>& x, Mode mode) {
    if (x->value.rank() != 4 || x->value.shape()[1] != cfg_.in_channels)
        throw ShapeError("discriminator: expected (N," + std::to_string(cfg_.in_channels) +
                         ",H,W) input, got " + shape_str(x->value.shape()));
    const std::size_t H = x->value.shape()[2], W = x->value.shape()[3];
    const std::size_t div = cfg_.total_downsample();
    if (H % div != 0 || W % div != 0)
        throw ShapeError("discriminator: spatial extents must be divisible by " +
                         std::to_string(div) + ", got " + shape_str(x->value.shape()));

    NodePtr<T> h = x;
    for (auto& block : blocks_) {
        h = block.conv.forward(h);
        if (block.bn) h = block.bn->forward(h, mode);
        h = leaky_relu(h, T(0.2));
    }
    h = head_.forward(h);
    return sigmoid_op(h);
}

template <typename T>
std::vector<NodePtr<T>> Discriminator<T>::parameters() const {
    std::vector<NodePtr<T>> out;
    for (const auto& block : blocks_) {
        block.conv.collect_parameters(out);
        if (block.bn) block.bn->collect_parameters(out);
    }
    head_.collect_parameters(out);
    return out;
}

template <typename T>
std::vector<std::pair<std::string, Tensor<T>*>> Discriminator<T>::buffers() {
    std::vector<std::pair<std::string, Tensor<T>*>> out;
    for (auto& block : blocks_)
        if (block.bn) block.bn->collect_buffers(out);
    return out;
}

template <typename T>
std::size_t parameter_count(const std::vector<NodePtr<T>>& params) {
    std::size_t n = 0;
    for (const auto& p : params) n += p->value.size();
    return n;
}

#define SSRGAN_INSTANTIATE_MODEL(T)                                                      \
    template Tensor<T> forward_tensor<T>(Network<T>&, const Tensor<T>&, Mode);           \
    template class Generator<T>;                                                         \
    template class Discriminator<T>;                                                     \
    template std::size_t parameter_count<T>(const std::vector<NodePtr<T>>&);

SSRGAN_INSTANTIATE_MODEL(float)
SSRGAN_INSTANTIATE_MODEL(double)

#undef SSRGAN_INSTANTIATE_MODEL

} // namespace ssrgan
