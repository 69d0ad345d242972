#pragma once

#include <string>
#include <vector>

#include "ssrgan/image.hpp"

namespace ssrgan {

struct PlotSeries {
    std::vector<double> x;
    std::vector<double> y;
};

/// Minimal line chart: axes, ticks with numeric labels, one polyline per
/// series in a fixed palette. CSVs remain the canonical output; this is the
/// quick visual companion.
Image render_line_chart(const std::vector<PlotSeries>& series, std::size_t width = 640,
                        std::size_t height = 480);

} // namespace ssrgan
