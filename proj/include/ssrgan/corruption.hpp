#pragma once

#include <cstdint>
#include <vector>

#include "ssrgan/rng.hpp"
#include "ssrgan/tensor.hpp"

namespace ssrgan {

/// Boolean H x W plane marking eliminated pixel sites. Exactly
/// floor(level * H * W) sites are set, chosen uniformly without
/// replacement; reproducible from (height, width, level, seed).
struct CorruptionMask {
    std::size_t height = 0;
    std::size_t width = 0;
    double level = 0.0;
    std::uint64_t seed = 0;
    std::vector<std::uint8_t> corrupted; // row-major, 1 = eliminated

    std::size_t count() const {
        std::size_t n = 0;
        for (std::uint8_t c : corrupted) n += c;
        return n;
    }
    bool at(std::size_t y, std::size_t x) const { return corrupted[y * width + x] != 0; }
};

/// Exact-count uniform site selection via a seeded partial Fisher-Yates
/// shuffle of all H*W indices.
CorruptionMask make_mask(std::size_t height, std::size_t width, double level, std::uint64_t seed);

/// Same, drawing the mask seed from the given stream.
CorruptionMask make_mask(std::size_t height, std::size_t width, double level, Rng& rng);

/// Sets all channels of masked sites to `fill` (default -1, black in
/// normalized [-1,1] space); other sites pass through bit-identically.
/// img is (C,H,W) or (N,C,H,W) with matching spatial extents.
template <typename T>
Tensor<T> apply_mask(const Tensor<T>& img, const CorruptionMask& mask, T fill = T(-1));

} // namespace ssrgan
