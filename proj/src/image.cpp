#include "ssrgan/image.hpp"

#include <atomic>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>

#include "ssrgan/errors.hpp"

namespace ssrgan {

namespace {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read failed for " + path.string());
    return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), long(bytes.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

// parses "P6\n<w> <h>\n<max>\n" style headers with # comments
struct PnmHeader {
    std::uint32_t width = 0, height = 0, maxval = 0;
    std::size_t payload_offset = 0;
};

PnmHeader parse_pnm_header(std::span<const std::uint8_t> bytes, const char* magic,
                           const std::string& name) {
    if (bytes.size() < 2 || bytes[0] != std::uint8_t(magic[0]) ||
        bytes[1] != std::uint8_t(magic[1]))
        throw FormatError(name + ": bad magic");
    std::size_t pos = 2;
    std::uint32_t fields[3];
    for (auto& field : fields) {
        // whitespace and comments
        for (;;) {
            if (pos >= bytes.size()) throw FormatError(name + ": truncated header");
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(bytes[pos])) {
                ++pos;
            } else {
                break;
            }
        }
        std::uint64_t v = 0;
        bool any = false;
        while (pos < bytes.size() && std::isdigit(bytes[pos])) {
            v = v * 10 + (bytes[pos] - '0');
            if (v > 0xffffffffull) throw FormatError(name + ": header value overflow");
            ++pos;
            any = true;
        }
        if (!any) throw FormatError(name + ": malformed header");
        field = std::uint32_t(v);
    }
    if (pos >= bytes.size() || !std::isspace(bytes[pos]))
        throw FormatError(name + ": missing header terminator");
    ++pos; // exactly one whitespace byte before the payload
    PnmHeader header;
    header.width = fields[0];
    header.height = fields[1];
    header.maxval = fields[2];
    header.payload_offset = pos;
    if (header.width == 0 || header.height == 0) throw FormatError(name + ": zero dimension");
    if (header.maxval != 255) throw FormatError(name + ": only maxval 255 supported");
    return header;
}

Image decode_pnm(std::span<const std::uint8_t> bytes, std::uint32_t channels,
                 const std::string& name) {
    const auto header = parse_pnm_header(bytes, channels == 3 ? "P6" : "P5", name);
    Image img;
    img.width = header.width;
    img.height = header.height;
    img.channels = channels;
    const std::size_t need = std::size_t(header.width) * header.height * channels;
    if (bytes.size() - header.payload_offset < need)
        throw IoError(name + ": truncated pixel data");
    img.pixels.assign(bytes.begin() + long(header.payload_offset),
                      bytes.begin() + long(header.payload_offset + need));
    return img;
}

} // namespace

Image load_image_bytes(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    if (bytes.size() >= 8 && bytes[0] == 137 && bytes[1] == 'P' && bytes[2] == 'N' &&
        bytes[3] == 'G')
        return png::decode(bytes);
    if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '6')
        return decode_pnm(bytes, 3, path.string());
    if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5')
        return decode_pnm(bytes, 1, path.string());
    throw FormatError(path.string() + ": unsupported format (need PNG, PPM P6 or PGM P5)");
}

ImageRecord load_image(const std::filesystem::path& path) {
    const Image img = load_image_bytes(path);
    ImageRecord record;
    record.pixels = to_tensor(img);
    record.source_path = path.string();
    record.original_width = img.width;
    record.original_height = img.height;
    return record;
}

void save_png(const std::filesystem::path& path, const Image& image) {
    write_file(path, png::encode(image));
}

void save_ppm(const std::filesystem::path& path, const Image& image) {
    if (image.channels != 3) throw FormatError("ppm: expected 3 channels");
    std::string header = "P6\n" + std::to_string(image.width) + " " +
                         std::to_string(image.height) + "\n255\n";
    std::vector<std::uint8_t> bytes(header.begin(), header.end());
    bytes.insert(bytes.end(), image.pixels.begin(), image.pixels.end());
    write_file(path, bytes);
}

void save_pgm(const std::filesystem::path& path, const Image& image) {
    if (image.channels != 1) throw FormatError("pgm: expected 1 channel");
    std::string header = "P5\n" + std::to_string(image.width) + " " +
                         std::to_string(image.height) + "\n255\n";
    std::vector<std::uint8_t> bytes(header.begin(), header.end());
    bytes.insert(bytes.end(), image.pixels.begin(), image.pixels.end());
    write_file(path, bytes);
}

Tensor<float> to_tensor(const Image& image) {
    if (image.channels != 1 && image.channels != 3)
        throw FormatError("to_tensor: expected 1 or 3 channels");
    const std::size_t h = image.height, w = image.width;
    Tensor<float> out(Shape{3, h, w});
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x)
            for (std::size_t c = 0; c < 3; ++c) {
                const std::size_t src_c = image.channels == 1 ? 0 : c;
                out[(c * h + y) * w + x] =
                    float(image.pixels[(y * w + x) * image.channels + src_c]) / 255.0f;
            }
    return out;
}

Image to_image(const Tensor<float>& chw) {
    if (chw.rank() != 3 || chw.shape()[0] != 3)
        throw ShapeError("to_image: expected (3,H,W), got " + shape_str(chw.shape()));
    const std::size_t h = chw.shape()[1], w = chw.shape()[2];
    Image img;
    img.width = std::uint32_t(w);
    img.height = std::uint32_t(h);
    img.channels = 3;
    img.pixels.resize(h * w * 3);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x)
            for (std::size_t c = 0; c < 3; ++c) {
                const float v = std::min(1.0f, std::max(0.0f, chw[(c * h + y) * w + x]));
                img.pixels[(y * w + x) * 3 + c] = std::uint8_t(std::lround(v * 255.0f));
            }
    return img;
}

Tensor<float> resize_bilinear(const Tensor<float>& chw, std::size_t out_h, std::size_t out_w) {
    if (chw.rank() != 3) throw ShapeError("resize: expected (C,H,W)");
    if (out_h < 2 || out_w < 2) throw ValueError("resize: target extents must be >= 2");
    const std::size_t C = chw.shape()[0], H = chw.shape()[1], W = chw.shape()[2];
    Tensor<float> out(Shape{C, out_h, out_w});

    const double scale_y = double(H) / double(out_h);
    const double scale_x = double(W) / double(out_w);
    for (std::size_t oy = 0; oy < out_h; ++oy) {
        // half-pixel center alignment
        const double sy = std::max(0.0, std::min(double(H) - 1.0,
                                                 (double(oy) + 0.5) * scale_y - 0.5));
        const std::size_t y0 = std::size_t(sy);
        const std::size_t y1 = std::min(y0 + 1, H - 1);
        const float fy = float(sy - double(y0));
        for (std::size_t ox = 0; ox < out_w; ++ox) {
            const double sx = std::max(0.0, std::min(double(W) - 1.0,
                                                     (double(ox) + 0.5) * scale_x - 0.5));
            const std::size_t x0 = std::size_t(sx);
            const std::size_t x1 = std::min(x0 + 1, W - 1);
            const float fx = float(sx - double(x0));
            for (std::size_t c = 0; c < C; ++c) {
                const float* plane = chw.data() + c * H * W;
                const float top = plane[y0 * W + x0] * (1.0f - fx) + plane[y0 * W + x1] * fx;
                const float bottom = plane[y1 * W + x0] * (1.0f - fx) + plane[y1 * W + x1] * fx;
                out[(c * out_h + oy) * out_w + ox] = top * (1.0f - fy) + bottom * fy;
            }
        }
    }
    return out;
}

ImageRecord resize_bilinear(const ImageRecord& record, std::size_t out_h, std::size_t out_w) {
    ImageRecord out = record;
    out.pixels = resize_bilinear(record.pixels, out_h, out_w);
    return out;
}

Tensor<float> normalize(const Tensor<float>& x01) {
    static std::atomic<bool> warned{false};
    Tensor<float> out(x01.shape());
    bool clamped = false;
    for (std::size_t i = 0; i < x01.size(); ++i) {
        float v = x01[i];
        if (v < 0.0f || v > 1.0f) {
            v = std::min(1.0f, std::max(0.0f, v));
            clamped = true;
        }
        out[i] = 2.0f * v - 1.0f;
    }
    if (clamped && !warned.exchange(true))
        std::cerr << "warning: normalize() clamped out-of-range input to [0,1]\n";
    return out;
}

Tensor<float> denormalize(const Tensor<float>& pm1) {
    Tensor<float> out(pm1.shape());
    for (std::size_t i = 0; i < pm1.size(); ++i)
        out[i] = std::min(1.0f, std::max(0.0f, (pm1[i] + 1.0f) * 0.5f));
    return out;
}

} // namespace ssrgan
