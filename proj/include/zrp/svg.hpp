/// @file svg.hpp
/// @brief Minimal static line plots.
#pragma once

#include <string>
#include <vector>

namespace zrp {

struct PlotSeries {
    std::string label;
    std::vector<double> x, y;
    std::vector<double> err;  // optional symmetric error bars
    bool markers = false;
};

struct PlotSpec {
    std::string title, xlabel, ylabel;
    bool logx = false, logy = false;
    std::vector<PlotSeries> series;
};

std::string render_svg(const PlotSpec& plot);

}  // namespace zrp
