#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace ssrgan::png {

/// CRC-32 (IEEE 802.3, reflected), as used by PNG chunks and the checkpoint
/// tensor directory.
std::uint32_t crc32(std::span<const std::uint8_t> data, std::uint32_t seed = 0);

std::uint32_t adler32(std::span<const std::uint8_t> data);

/// Inflates a zlib stream (RFC 1950/1951): stored, fixed-Huffman and
/// dynamic-Huffman blocks. Verifies the adler32 trailer.
std::vector<std::uint8_t> zlib_inflate(std::span<const std::uint8_t> stream);

/// Wraps raw bytes in a zlib stream of stored (uncompressed) blocks. Larger
/// than real compression but byte-deterministic everywhere.
std::vector<std::uint8_t> zlib_deflate_stored(std::span<const std::uint8_t> raw);

/// 8-bit image payload, interleaved rows; channels is 1 (gray) or 3 (RGB).
struct RawImage {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::uint32_t channels = 0;
    std::vector<std::uint8_t> pixels;
};

/// Decodes an 8-bit non-interlaced grayscale or RGB PNG. All five row
/// filters are handled; chunk CRCs are verified.
RawImage decode(std::span<const std::uint8_t> file);

/// Encodes with filter 0 rows and stored-block zlib data.
std::vector<std::uint8_t> encode(const RawImage& image);

} // namespace ssrgan::png
