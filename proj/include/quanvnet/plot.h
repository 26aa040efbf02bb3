#pragma once

#include <string>
#include <utility>
#include <vector>

namespace quanvnet::plot {

struct Series {
    std::string label;
    std::vector<std::pair<double, double>> points;
    bool step = false;  // draw as a staircase (x first, then y)
};

struct Axes {
    std::string title;
    std::string x_label;
    std::string y_label;
    double x_min = 0, x_max = 1;
    double y_min = 0, y_max = 1;
    bool diagonal = false;  // dashed y = x reference
};

/// Static SVG line chart. Points outside the axis range are clamped to the frame.
std::string line_chart_svg(const Axes& axes, const std::vector<Series>& series);

}  // namespace quanvnet::plot
