#include "ssrgan/plot.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "ssrgan/errors.hpp"

namespace ssrgan {

namespace {

// 5x7 glyphs for tick labels: digits plus '.', '-', 'e'
struct Glyph {
    char ch;
    std::uint8_t rows[7]; // 5 low bits per row, MSB-left
};

constexpr Glyph kFont[] = {
    {'0', {0x0e, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0e}},
    {'1', {0x04, 0x0c, 0x04, 0x04, 0x04, 0x04, 0x0e}},
    {'2', {0x0e, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1f}},
    {'3', {0x1f, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0e}},
    {'4', {0x02, 0x06, 0x0a, 0x12, 0x1f, 0x02, 0x02}},
    {'5', {0x1f, 0x10, 0x1e, 0x01, 0x01, 0x11, 0x0e}},
    {'6', {0x06, 0x08, 0x10, 0x1e, 0x11, 0x11, 0x0e}},
    {'7', {0x1f, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
    {'8', {0x0e, 0x11, 0x11, 0x0e, 0x11, 0x11, 0x0e}},
    {'9', {0x0e, 0x11, 0x11, 0x0f, 0x01, 0x02, 0x0c}},
    {'.', {0x00, 0x00, 0x00, 0x00, 0x00, 0x0c, 0x0c}},
    {'-', {0x00, 0x00, 0x00, 0x1f, 0x00, 0x00, 0x00}},
    {'+', {0x00, 0x04, 0x04, 0x1f, 0x04, 0x04, 0x00}},
    {'e', {0x00, 0x00, 0x0e, 0x11, 0x1f, 0x10, 0x0e}},
};

const Glyph* find_glyph(char c) {
    for (const auto& glyph : kFont)
        if (glyph.ch == c) return &glyph;
    return nullptr;
}

struct Canvas {
    std::size_t width, height;
    std::vector<std::uint8_t> rgb;

    Canvas(std::size_t w, std::size_t h) : width(w), height(h), rgb(w * h * 3, 255) {}

    void put(long x, long y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
        if (x < 0 || y < 0 || x >= long(width) || y >= long(height)) return;
        const std::size_t i = (std::size_t(y) * width + std::size_t(x)) * 3;
        rgb[i] = r;
        rgb[i + 1] = g;
        rgb[i + 2] = b;
    }

    void line(long x0, long y0, long x1, long y1, std::uint8_t r, std::uint8_t g,
              std::uint8_t b) {
        // Bresenham
        const long dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
        const long sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
        long err = dx + dy;
        for (;;) {
            put(x0, y0, r, g, b);
            if (x0 == x1 && y0 == y1) break;
            const long e2 = 2 * err;
            if (e2 >= dy) {
                err += dy;
                x0 += sx;
            }
            if (e2 <= dx) {
                err += dx;
                y0 += sy;
            }
        }
    }

    void text(long x, long y, const std::string& s) {
        for (char c : s) {
            if (const Glyph* glyph = find_glyph(c)) {
                for (int row = 0; row < 7; ++row)
                    for (int col = 0; col < 5; ++col)
                        if (glyph->rows[row] & (1 << (4 - col)))
                            put(x + col, y + row, 40, 40, 40);
            }
            x += 6;
        }
    }
};

std::string tick_label(double v) {
    char buffer[32];
    auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), v,
                                   std::chars_format::general, 4);
    return std::string(buffer, end);
}

constexpr std::uint8_t kPalette[][3] = {
    {31, 119, 180}, {214, 39, 40}, {44, 160, 44}, {148, 103, 189}, {255, 127, 14},
    {140, 86, 75},
};

} // namespace

Image render_line_chart(const std::vector<PlotSeries>& series, std::size_t width,
                        std::size_t height) {
    if (series.empty()) throw ValueError("render_line_chart: no series");
    double min_x = 1e300, max_x = -1e300, min_y = 1e300, max_y = -1e300;
    for (const auto& s : series) {
        if (s.x.size() != s.y.size() || s.x.empty())
            throw ValueError("render_line_chart: malformed series");
        for (double v : s.x) {
            min_x = std::min(min_x, v);
            max_x = std::max(max_x, v);
        }
        for (double v : s.y) {
            min_y = std::min(min_y, v);
            max_y = std::max(max_y, v);
        }
    }
    if (max_x == min_x) max_x = min_x + 1.0;
    if (max_y == min_y) max_y = min_y + 1.0;

    Canvas canvas(width, height);
    const long left = 64, right = long(width) - 16, top = 16, bottom = long(height) - 40;

    auto px = [&](double x) {
        return left + long((x - min_x) / (max_x - min_x) * double(right - left));
    };
    auto py = [&](double y) {
        return bottom - long((y - min_y) / (max_y - min_y) * double(bottom - top));
    };

    canvas.line(left, top, left, bottom, 0, 0, 0);
    canvas.line(left, bottom, right, bottom, 0, 0, 0);

    for (int t = 0; t <= 4; ++t) {
        const double xv = min_x + (max_x - min_x) * t / 4.0;
        const double yv = min_y + (max_y - min_y) * t / 4.0;
        canvas.line(px(xv), bottom, px(xv), bottom + 4, 0, 0, 0);
        canvas.text(px(xv) - 12, bottom + 8, tick_label(xv));
        canvas.line(left - 4, py(yv), left, py(yv), 0, 0, 0);
        canvas.text(4, py(yv) - 3, tick_label(yv));
    }

    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& color = kPalette[si % 6];
        const auto& s = series[si];
        for (std::size_t i = 1; i < s.x.size(); ++i)
            canvas.line(px(s.x[i - 1]), py(s.y[i - 1]), px(s.x[i]), py(s.y[i]), color[0],
                        color[1], color[2]);
        // point markers
        for (std::size_t i = 0; i < s.x.size(); ++i)
            for (long dy = -1; dy <= 1; ++dy)
                for (long dx = -1; dx <= 1; ++dx)
                    canvas.put(px(s.x[i]) + dx, py(s.y[i]) + dy, color[0], color[1], color[2]);
    }

    Image img;
    img.width = std::uint32_t(width);
    img.height = std::uint32_t(height);
    img.channels = 3;
    img.pixels = std::move(canvas.rgb);
    return img;
}

} // namespace ssrgan
