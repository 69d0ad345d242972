#include "ssrgan/png.hpp"

#include <array>
#include <cstring>
#include <string>

#include "ssrgan/errors.hpp"

namespace ssrgan::png {

namespace {

std::array<std::uint32_t, 256> make_crc_table() {
    std::array<std::uint32_t, 256> table{};
    for (std::uint32_t n = 0; n < 256; ++n) {
        std::uint32_t c = n;
        for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xedb88320u ^ (c >> 1) : c >> 1;
        table[n] = c;
    }
    return table;
}

} // namespace

std::uint32_t crc32(std::span<const std::uint8_t> data, std::uint32_t seed) {
    static const auto table = make_crc_table();
    std::uint32_t c = seed ^ 0xffffffffu;
    for (std::uint8_t byte : data) c = table[(c ^ byte) & 0xffu] ^ (c >> 8);
    return c ^ 0xffffffffu;
}

std::uint32_t adler32(std::span<const std::uint8_t> data) {
    std::uint32_t a = 1, b = 0;
    for (std::uint8_t byte : data) {
        a = (a + byte) % 65521u;
        b = (b + a) % 65521u;
    }
    return (b << 16) | a;
}

// ---- inflate ----

namespace {

struct BitReader {
    std::span<const std::uint8_t> data;
    std::size_t pos = 0; // byte position
    std::uint32_t bit = 0;

    std::uint32_t take_bit() {
        if (pos >= data.size()) throw FormatError("inflate: truncated stream");
        std::uint32_t v = (data[pos] >> bit) & 1u;
        if (++bit == 8) {
            bit = 0;
            ++pos;
        }
        return v;
    }

    std::uint32_t take(std::uint32_t count) {
        std::uint32_t v = 0;
        for (std::uint32_t i = 0; i < count; ++i) v |= take_bit() << i;
        return v;
    }

    void align_to_byte() {
        if (bit) {
            bit = 0;
            ++pos;
        }
    }
};

/// Canonical Huffman decoder built from code lengths (RFC 1951, 3.2.2).
struct Huffman {
    // for each bit length: first code value and index into `symbols`
    std::array<std::uint32_t, 16> first_code{};
    std::array<std::uint32_t, 16> first_index{};
    std::array<std::uint32_t, 16> count{};
    std::vector<std::uint16_t> symbols;

    explicit Huffman(std::span<const std::uint8_t> lengths) {
        for (std::uint8_t len : lengths)
            if (len) count[len] += 1;
        std::uint32_t code = 0, index = 0;
        for (std::uint32_t len = 1; len < 16; ++len) {
            code = (code + count[len - 1]) << 1;
            first_code[len] = code;
            first_index[len] = index;
            index += count[len];
        }
        symbols.resize(index);
        std::array<std::uint32_t, 16> next{};
        for (std::uint32_t sym = 0; sym < lengths.size(); ++sym) {
            const std::uint8_t len = lengths[sym];
            if (len) symbols[first_index[len] + next[len]++] = std::uint16_t(sym);
        }
    }

    std::uint16_t decode(BitReader& bits) const {
        std::uint32_t code = 0;
        for (std::uint32_t len = 1; len < 16; ++len) {
            code |= bits.take_bit();
            if (count[len] && code < first_code[len] + count[len])
                return symbols[first_index[len] + (code - first_code[len])];
            code <<= 1;
        }
        throw FormatError("inflate: invalid Huffman code");
    }
};

constexpr std::uint16_t kLengthBase[29] = {3,  4,  5,  6,  7,  8,  9,  10, 11,  13,
                                           15, 17, 19, 23, 27, 31, 35, 43, 51,  59,
                                           67, 83, 99, 115, 131, 163, 195, 227, 258};
constexpr std::uint8_t kLengthExtra[29] = {0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2,
                                           2, 3, 3, 3, 3, 4, 4, 4, 4, 5, 5, 5, 5, 0};
constexpr std::uint16_t kDistBase[30] = {1,    2,    3,    4,    5,    7,     9,    13,
                                         17,   25,   33,   49,   65,   97,    129,  193,
                                         257,  385,  513,  769,  1025, 1537,  2049, 3073,
                                         4097, 6145, 8193, 12289, 16385, 24577};
constexpr std::uint8_t kDistExtra[30] = {0, 0, 0,  0,  1,  1,  2,  2,  3,  3,  4,  4,  5, 5, 6,
                                         6, 7, 7,  8,  8,  9,  9,  10, 10, 11, 11, 12, 12, 13, 13};

void inflate_block(BitReader& bits, const Huffman& lit, const Huffman& dist,
                   std::vector<std::uint8_t>& out) {
    for (;;) {
        const std::uint16_t sym = lit.decode(bits);
        if (sym < 256) {
            out.push_back(std::uint8_t(sym));
        } else if (sym == 256) {
            return;
        } else {
            if (sym > 285) throw FormatError("inflate: bad length symbol");
            const std::uint32_t idx = sym - 257u;
            const std::uint32_t length = kLengthBase[idx] + bits.take(kLengthExtra[idx]);
            const std::uint16_t dsym = dist.decode(bits);
            if (dsym > 29) throw FormatError("inflate: bad distance symbol");
            const std::uint32_t distance = kDistBase[dsym] + bits.take(kDistExtra[dsym]);
            if (distance > out.size()) throw FormatError("inflate: distance beyond output");
            const std::size_t start = out.size() - distance;
            for (std::uint32_t i = 0; i < length; ++i) out.push_back(out[start + i]);
        }
    }
}

Huffman fixed_literal_table() {
    std::vector<std::uint8_t> lengths(288);
    for (std::size_t i = 0; i < 144; ++i) lengths[i] = 8;
    for (std::size_t i = 144; i < 256; ++i) lengths[i] = 9;
    for (std::size_t i = 256; i < 280; ++i) lengths[i] = 7;
    for (std::size_t i = 280; i < 288; ++i) lengths[i] = 8;
    return Huffman(lengths);
}

Huffman fixed_distance_table() {
    std::vector<std::uint8_t> lengths(30, 5);
    return Huffman(lengths);
}

} // namespace

std::vector<std::uint8_t> zlib_inflate(std::span<const std::uint8_t> stream) {
    if (stream.size() < 6) throw FormatError("inflate: stream too short");
    const std::uint8_t cmf = stream[0], flg = stream[1];
    if ((cmf & 0x0f) != 8) throw FormatError("inflate: not a deflate stream");
    if ((std::uint32_t(cmf) * 256 + flg) % 31 != 0) throw FormatError("inflate: bad zlib header");
    if (flg & 0x20) throw FormatError("inflate: preset dictionaries unsupported");

    BitReader bits{stream.subspan(2, stream.size() - 6), 0, 0};
    std::vector<std::uint8_t> out;

    for (;;) {
        const std::uint32_t final_block = bits.take_bit();
        const std::uint32_t type = bits.take(2);
        if (type == 0) {
            bits.align_to_byte();
            if (bits.pos + 4 > bits.data.size()) throw FormatError("inflate: truncated stored block");
            const std::uint32_t len = bits.data[bits.pos] | (bits.data[bits.pos + 1] << 8);
            const std::uint32_t nlen = bits.data[bits.pos + 2] | (bits.data[bits.pos + 3] << 8);
            if ((len ^ nlen) != 0xffffu) throw FormatError("inflate: stored length mismatch");
            bits.pos += 4;
            if (bits.pos + len > bits.data.size()) throw FormatError("inflate: truncated stored block");
            out.insert(out.end(), bits.data.begin() + long(bits.pos),
                       bits.data.begin() + long(bits.pos + len));
            bits.pos += len;
        } else if (type == 1) {
            static const Huffman lit = fixed_literal_table();
            static const Huffman dist = fixed_distance_table();
            inflate_block(bits, lit, dist, out);
        } else if (type == 2) {
            const std::uint32_t hlit = bits.take(5) + 257;
            const std::uint32_t hdist = bits.take(5) + 1;
            const std::uint32_t hclen = bits.take(4) + 4;
            static constexpr std::uint8_t order[19] = {16, 17, 18, 0, 8,  7, 9,  6, 10, 5,
                                                       11, 4,  12, 3, 13, 2, 14, 1, 15};
            std::vector<std::uint8_t> cl_lengths(19, 0);
            for (std::uint32_t i = 0; i < hclen; ++i)
                cl_lengths[order[i]] = std::uint8_t(bits.take(3));
            Huffman cl(cl_lengths);

            std::vector<std::uint8_t> lengths;
            lengths.reserve(hlit + hdist);
            while (lengths.size() < hlit + hdist) {
                const std::uint16_t sym = cl.decode(bits);
                if (sym < 16) {
                    lengths.push_back(std::uint8_t(sym));
                } else if (sym == 16) {
                    if (lengths.empty()) throw FormatError("inflate: repeat with no previous length");
                    const std::uint32_t rep = 3 + bits.take(2);
                    lengths.insert(lengths.end(), rep, lengths.back());
                } else if (sym == 17) {
                    lengths.insert(lengths.end(), 3 + bits.take(3), 0);
                } else {
                    lengths.insert(lengths.end(), 11 + bits.take(7), 0);
                }
            }
            if (lengths.size() != hlit + hdist)
                throw FormatError("inflate: code length overflow");
            Huffman lit(std::span(lengths.data(), hlit));
            Huffman dist(std::span(lengths.data() + hlit, hdist));
            inflate_block(bits, lit, dist, out);
        } else {
            throw FormatError("inflate: reserved block type");
        }
        if (final_block) break;
    }

    // adler32 trailer, big-endian, after the compressed bits
    bits.align_to_byte();
    const std::size_t trailer = 2 + bits.pos;
    if (trailer + 4 > stream.size()) throw FormatError("inflate: missing adler32");
    const std::uint32_t want = (std::uint32_t(stream[trailer]) << 24) |
                               (std::uint32_t(stream[trailer + 1]) << 16) |
                               (std::uint32_t(stream[trailer + 2]) << 8) |
                               std::uint32_t(stream[trailer + 3]);
    if (adler32(out) != want) throw FormatError("inflate: adler32 mismatch");
    return out;
}

std::vector<std::uint8_t> zlib_deflate_stored(std::span<const std::uint8_t> raw) {
    std::vector<std::uint8_t> out;
    out.reserve(raw.size() + raw.size() / 65535 * 5 + 16);
    out.push_back(0x78); // CM=8, CINFO=7
    out.push_back(0x01); // no dict, fastest; (0x7801 % 31 == 0)

    std::size_t offset = 0;
    do {
        const std::size_t chunk = std::min<std::size_t>(raw.size() - offset, 65535);
        const bool last = offset + chunk == raw.size();
        out.push_back(last ? 1 : 0);
        out.push_back(std::uint8_t(chunk & 0xff));
        out.push_back(std::uint8_t(chunk >> 8));
        out.push_back(std::uint8_t(~chunk & 0xff));
        out.push_back(std::uint8_t((~chunk >> 8) & 0xff));
        out.insert(out.end(), raw.begin() + long(offset), raw.begin() + long(offset + chunk));
        offset += chunk;
    } while (offset < raw.size());

    const std::uint32_t checksum = adler32(raw);
    out.push_back(std::uint8_t(checksum >> 24));
    out.push_back(std::uint8_t(checksum >> 16));
    out.push_back(std::uint8_t(checksum >> 8));
    out.push_back(std::uint8_t(checksum));
    return out;
}

// ---- PNG container ----

namespace {

constexpr std::uint8_t kSignature[8] = {137, 80, 78, 71, 13, 10, 26, 10};

std::uint32_t read_u32(const std::uint8_t* p) {
    return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
           (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
}

void write_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(std::uint8_t(v >> 24));
    out.push_back(std::uint8_t(v >> 16));
    out.push_back(std::uint8_t(v >> 8));
    out.push_back(std::uint8_t(v));
}

void write_chunk(std::vector<std::uint8_t>& out, const char* tag,
                 std::span<const std::uint8_t> payload) {
    write_u32(out, std::uint32_t(payload.size()));
    const std::size_t crc_start = out.size();
    out.insert(out.end(), tag, tag + 4);
    out.insert(out.end(), payload.begin(), payload.end());
    write_u32(out, crc32(std::span(out.data() + crc_start, out.size() - crc_start)));
}

std::uint8_t paeth(int a, int b, int c) {
    const int p = a + b - c;
    const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return std::uint8_t(a);
    if (pb <= pc) return std::uint8_t(b);
    return std::uint8_t(c);
}

} // namespace

RawImage decode(std::span<const std::uint8_t> file) {
    if (file.size() < 8 || std::memcmp(file.data(), kSignature, 8) != 0)
        throw FormatError("png: bad signature");

    RawImage img;
    std::vector<std::uint8_t> idat;
    bool saw_ihdr = false, saw_iend = false;
    std::size_t pos = 8;
    while (pos + 8 <= file.size() && !saw_iend) {
        const std::uint32_t length = read_u32(file.data() + pos);
        if (pos + 12 + length > file.size()) throw FormatError("png: truncated chunk");
        const char* tag = reinterpret_cast<const char*>(file.data() + pos + 4);
        std::span<const std::uint8_t> payload(file.data() + pos + 8, length);
        const std::uint32_t want_crc = read_u32(file.data() + pos + 8 + length);
        if (crc32(std::span(file.data() + pos + 4, length + 4)) != want_crc)
            throw FormatError("png: chunk CRC mismatch");

        if (std::memcmp(tag, "IHDR", 4) == 0) {
            if (length != 13) throw FormatError("png: bad IHDR");
            img.width = read_u32(payload.data());
            img.height = read_u32(payload.data() + 4);
            const std::uint8_t depth = payload[8], color = payload[9];
            const std::uint8_t interlace = payload[12];
            if (depth != 8) throw FormatError("png: only 8-bit depth supported");
            if (color == 0)
                img.channels = 1;
            else if (color == 2)
                img.channels = 3;
            else
                throw FormatError("png: only grayscale and RGB color types supported");
            if (interlace != 0) throw FormatError("png: interlacing unsupported");
            if (img.width == 0 || img.height == 0) throw FormatError("png: zero dimension");
            saw_ihdr = true;
        } else if (std::memcmp(tag, "IDAT", 4) == 0) {
            idat.insert(idat.end(), payload.begin(), payload.end());
        } else if (std::memcmp(tag, "IEND", 4) == 0) {
            saw_iend = true;
        } // ancillary chunks are skipped
        pos += 12 + length;
    }
    if (!saw_ihdr || !saw_iend) throw FormatError("png: missing IHDR or IEND");

    const std::size_t bpp = img.channels;
    const std::size_t row_bytes = std::size_t(img.width) * bpp;
    std::vector<std::uint8_t> raw = zlib_inflate(idat);
    if (raw.size() != (row_bytes + 1) * img.height)
        throw FormatError("png: decompressed size mismatch");

    img.pixels.resize(row_bytes * img.height);
    for (std::size_t y = 0; y < img.height; ++y) {
        const std::uint8_t filter = raw[y * (row_bytes + 1)];
        const std::uint8_t* src = raw.data() + y * (row_bytes + 1) + 1;
        std::uint8_t* dst = img.pixels.data() + y * row_bytes;
        const std::uint8_t* prev = y ? img.pixels.data() + (y - 1) * row_bytes : nullptr;
        for (std::size_t i = 0; i < row_bytes; ++i) {
            const int left = i >= bpp ? dst[i - bpp] : 0;
            const int up = prev ? prev[i] : 0;
            const int up_left = (prev && i >= bpp) ? prev[i - bpp] : 0;
            int v = src[i];
            switch (filter) {
                case 0: break;
                case 1: v += left; break;
                case 2: v += up; break;
                case 3: v += (left + up) / 2; break;
                case 4: v += paeth(left, up, up_left); break;
                default: throw FormatError("png: unknown row filter");
            }
            dst[i] = std::uint8_t(v & 0xff);
        }
    }
    return img;
}

std::vector<std::uint8_t> encode(const RawImage& image) {
    if (image.channels != 1 && image.channels != 3)
        throw FormatError("png: encode expects 1 or 3 channels");
    const std::size_t row_bytes = std::size_t(image.width) * image.channels;
    if (image.pixels.size() != row_bytes * image.height)
        throw FormatError("png: pixel buffer does not match dimensions");

    std::vector<std::uint8_t> out(kSignature, kSignature + 8);

    std::vector<std::uint8_t> ihdr;
    write_u32(ihdr, image.width);
    write_u32(ihdr, image.height);
    ihdr.push_back(8);                                   // bit depth
    ihdr.push_back(image.channels == 1 ? 0 : 2);         // color type
    ihdr.push_back(0);                                   // compression
    ihdr.push_back(0);                                   // filter method
    ihdr.push_back(0);                                   // no interlace
    write_chunk(out, "IHDR", ihdr);

    std::vector<std::uint8_t> raw((row_bytes + 1) * image.height);
    for (std::size_t y = 0; y < image.height; ++y) {
        raw[y * (row_bytes + 1)] = 0; // filter: none
        std::memcpy(raw.data() + y * (row_bytes + 1) + 1, image.pixels.data() + y * row_bytes,
                    row_bytes);
    }
    write_chunk(out, "IDAT", zlib_deflate_stored(raw));
    write_chunk(out, "IEND", {});
    return out;
}

} // namespace ssrgan::png
