#include "ssrgan/corruption.hpp"

#include <numeric>

#include "ssrgan/errors.hpp"

namespace ssrgan {

CorruptionMask make_mask(std::size_t height, std::size_t width, double level,
                         std::uint64_t seed) {
    if (!(level >= 0.0 && level <= 1.0))
        throw ValueError("corruption level " + std::to_string(level) + " outside [0,1]");
    if (height == 0 || width == 0) throw ShapeError("corruption mask with zero extent");

    CorruptionMask mask;
    mask.height = height;
    mask.width = width;
    mask.level = level;
    mask.seed = seed;
    mask.corrupted.assign(height * width, 0);

    const std::size_t total = height * width;
    const std::size_t k = static_cast<std::size_t>(level * double(total));

    // partial Fisher-Yates: after i swaps, indices[0..i) is a uniform
    // without-replacement sample of all sites
    std::vector<std::uint32_t> indices(total);
    std::iota(indices.begin(), indices.end(), 0u);
    Rng rng(seed);
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = i + std::size_t(rng.next_below(total - i));
        std::swap(indices[i], indices[j]);
        mask.corrupted[indices[i]] = 1;
    }
    return mask;
}

CorruptionMask make_mask(std::size_t height, std::size_t width, double level, Rng& rng) {
    return make_mask(height, width, level, rng.next_u64());
}

template <typename T>
Tensor<T> apply_mask(const Tensor<T>& img, const CorruptionMask& mask, T fill) {
    if (img.rank() != 3 && img.rank() != 4)
        throw ShapeError("apply_mask: expected (C,H,W) or (N,C,H,W), got " +
                         shape_str(img.shape()));
    const std::size_t H = img.shape()[img.rank() - 2];
    const std::size_t W = img.shape()[img.rank() - 1];
    if (H != mask.height || W != mask.width)
        throw ShapeError("apply_mask: image " + shape_str(img.shape()) + " vs mask " +
                         std::to_string(mask.height) + "x" + std::to_string(mask.width));

    Tensor<T> out = img;
    const std::size_t planes = img.size() / (H * W);
    for (std::size_t p = 0; p < planes; ++p) {
        T* plane = out.data() + p * H * W;
        for (std::size_t i = 0; i < H * W; ++i)
            if (mask.corrupted[i]) plane[i] = fill;
    }
    return out;
}

template Tensor<float> apply_mask<float>(const Tensor<float>&, const CorruptionMask&, float);
template Tensor<double> apply_mask<double>(const Tensor<double>&, const CorruptionMask&, double);

} // namespace ssrgan
