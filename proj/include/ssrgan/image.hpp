#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ssrgan/png.hpp"
#include "ssrgan/tensor.hpp"

namespace ssrgan {

/// 8-bit interleaved image, 1 or 3 channels.
using Image = png::RawImage;

/// Decoded image as a float tensor plus provenance.
struct ImageRecord {
    Tensor<float> pixels; // (3,H,W), values in [0,1]
    std::string source_path;
    std::size_t original_width = 0;
    std::size_t original_height = 0;
};

/// Reads a PNG (8-bit gray/RGB), binary PPM (P6) or binary PGM (P5),
/// sniffing the magic bytes. Grayscale is replicated to three channels in
/// the record; values are x/255.
ImageRecord load_image(const std::filesystem::path& path);

/// Raw codec entry points (also used for masks and CLI output).
Image load_image_bytes(const std::filesystem::path& path);
void save_png(const std::filesystem::path& path, const Image& image);
void save_ppm(const std::filesystem::path& path, const Image& image); // 3-channel
void save_pgm(const std::filesystem::path& path, const Image& image); // 1-channel

/// (3,H,W) [0,1] tensor to an 8-bit RGB image, round-to-nearest.
Image to_image(const Tensor<float>& chw);
Tensor<float> to_tensor(const Image& image); // replicates gray to 3 channels

/// Bilinear resize with half-pixel center alignment; output stays in the
/// input's value range.
Tensor<float> resize_bilinear(const Tensor<float>& chw, std::size_t out_h, std::size_t out_w);
ImageRecord resize_bilinear(const ImageRecord& record, std::size_t out_h, std::size_t out_w);

/// [0,1] -> [-1,1]: y = 2x - 1. Out-of-range input is clamped (one warning
/// per process).
Tensor<float> normalize(const Tensor<float>& x01);
/// [-1,1] -> [0,1] with clamping: x = clamp((y+1)/2, 0, 1).
Tensor<float> denormalize(const Tensor<float>& pm1);

} // namespace ssrgan
