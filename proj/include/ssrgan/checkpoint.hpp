#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "ssrgan/tensor.hpp"
#include "ssrgan/training_config.hpp"

namespace ssrgan {

/// Serialized training snapshot. Tensor order is the directory order and is
/// preserved bit-exactly through save/load.
///
/// File layout: magic "SSRG", u32 LE version (1), u64 LE header length,
/// UTF-8 JSON header (config, epoch, rng state, adam step counters, tensor
/// directory with dtype 0 = float32, rank, extents, byte offset, byte
/// length, CRC32), then raw little-endian IEEE-754 payloads in directory
/// order.
struct Checkpoint {
    static constexpr std::uint32_t kVersion = 1;

    TrainConfig config;
    std::uint64_t epoch = 0; // completed epochs
    std::array<std::uint64_t, 4> rng_state{};
    std::int64_t adam_step_g = 0;
    std::int64_t adam_step_d = 0;
    std::vector<std::pair<std::string, Tensor<float>>> tensors;

    const Tensor<float>* find(const std::string& name) const {
        for (const auto& [n, t] : tensors)
            if (n == name) return &t;
        return nullptr;
    }
};

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);

/// Throws CheckpointError naming the offending record on bad magic/version,
/// truncation, size mismatch or payload CRC failure.
Checkpoint load_checkpoint(const std::filesystem::path& path);

} // namespace ssrgan
