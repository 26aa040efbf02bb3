#include "quanvnet/plot.h"

#include <algorithm>
#include <array>
#include <sstream>

#include "quanvnet/errors.h"

namespace quanvnet::plot {

namespace {

constexpr double kWidth = 480, kHeight = 360;
constexpr double kLeft = 60, kRight = 130, kTop = 36, kBottom = 48;
constexpr std::array<const char*, 6> kColors = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

std::string escape(const std::string& text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string line_chart_svg(const Axes& axes, const std::vector<Series>& series) {
    if (!(axes.x_max > axes.x_min) || !(axes.y_max > axes.y_min)) {
        throw ConfigError("plot axes need max > min");
    }
    const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
    auto sx = [&](double x) {
        x = std::clamp(x, axes.x_min, axes.x_max);
        return kLeft + (x - axes.x_min) / (axes.x_max - axes.x_min) * pw;
    };
    auto sy = [&](double y) {
        y = std::clamp(y, axes.y_min, axes.y_max);
        return kTop + ph - (y - axes.y_min) / (axes.y_max - axes.y_min) * ph;
    };

    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(2);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << kLeft + pw / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"13\">"
        << escape(axes.title) << "</text>\n";
    out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"black\"/>\n";

    for (int i = 0; i <= 5; ++i) {
        const double fx = axes.x_min + (axes.x_max - axes.x_min) * i / 5.0;
        const double fy = axes.y_min + (axes.y_max - axes.y_min) * i / 5.0;
        out << "<line x1=\"" << sx(fx) << "\" y1=\"" << kTop + ph << "\" x2=\"" << sx(fx) << "\" y2=\""
            << kTop + ph + 4 << "\" stroke=\"black\"/>";
        out << "<text x=\"" << sx(fx) << "\" y=\"" << kTop + ph + 16 << "\" text-anchor=\"middle\">" << fx
            << "</text>\n";
        out << "<line x1=\"" << kLeft - 4 << "\" y1=\"" << sy(fy) << "\" x2=\"" << kLeft << "\" y2=\"" << sy(fy)
            << "\" stroke=\"black\"/>";
        out << "<text x=\"" << kLeft - 6 << "\" y=\"" << sy(fy) + 4 << "\" text-anchor=\"end\">" << fy
            << "</text>\n";
    }
    out << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 10 << "\" text-anchor=\"middle\">"
        << escape(axes.x_label) << "</text>\n";
    out << "<text transform=\"translate(16 " << kTop + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
        << escape(axes.y_label) << "</text>\n";
    if (axes.diagonal) {
        out << "<line x1=\"" << sx(axes.x_min) << "\" y1=\"" << sy(axes.y_min) << "\" x2=\"" << sx(axes.x_max)
            << "\" y2=\"" << sy(axes.y_max) << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
    }

    for (std::size_t k = 0; k < series.size(); ++k) {
        const Series& s = series[k];
        const char* color = kColors[k % kColors.size()];
        if (!s.points.empty()) {
            out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t i = 0; i < s.points.size(); ++i) {
                const auto [x, y] = s.points[i];
                if (s.step && i > 0) {
                    out << sx(x) << ',' << sy(s.points[i - 1].second) << ' ';
                }
                out << sx(x) << ',' << sy(y) << ' ';
            }
            out << "\"/>\n";
        }
        const double ly = kTop + 12 + 16 * static_cast<double>(k);
        out << "<line x1=\"" << kLeft + pw + 10 << "\" y1=\"" << ly << "\" x2=\"" << kLeft + pw + 26 << "\" y2=\"" << ly
            << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>";
        out << "<text x=\"" << kLeft + pw + 30 << "\" y=\"" << ly + 4 << "\">" << escape(s.label) << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace quanvnet::plot
