#pragma once

// Minimal static SVG line plots, generated in-process so figure output has no
// plotting dependency. Curves share one axis box with autoscaled ranges.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "cqsim/core.hpp"

namespace cqsim {

struct Curve {
    std::string label;
    std::vector<double> xs;
    std::vector<double> ys;
    std::string color = "#1f77b4";
};

inline void write_svg_plot(const std::string& path, const std::string& title,
                           const std::string& xlabel, const std::vector<Curve>& curves) {
    if (curves.empty()) throw SimError(ErrorCode::InvalidConfig, "plot needs curves");
    const double W = 720, H = 440, L = 70, R = 20, T = 40, B = 50;

    double xmin = 1e300, xmax = -1e300, ymin = 0.0, ymax = -1e300;
    for (const auto& c : curves)
        for (std::size_t i = 0; i < c.xs.size(); ++i) {
            xmin = std::min(xmin, c.xs[i]);
            xmax = std::max(xmax, c.xs[i]);
            ymin = std::min(ymin, c.ys[i]);
            ymax = std::max(ymax, c.ys[i]);
        }
    if (!(xmax > xmin)) xmax = xmin + 1.0;
    if (!(ymax > ymin)) ymax = ymin + 1.0;
    ymax *= 1.05;

    auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - ymin) / (ymax - ymin) * (H - T - B); };

    std::ofstream out(path);
    if (!out) throw SimError(ErrorCode::InvalidConfig, "cannot write '" + path + "'");
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H
        << "' viewBox='0 0 " << W << " " << H << "'>\n";
    out << "<rect width='100%' height='100%' fill='white'/>\n";
    out << "<text x='" << W / 2 << "' y='24' text-anchor='middle' font-size='16'>" << title
        << "</text>\n";
    out << "<line x1='" << L << "' y1='" << H - B << "' x2='" << W - R << "' y2='" << H - B
        << "' stroke='black'/>\n";
    out << "<line x1='" << L << "' y1='" << T << "' x2='" << L << "' y2='" << H - B
        << "' stroke='black'/>\n";

    const int n_ticks = 6;
    for (int i = 0; i <= n_ticks; ++i) {
        const double x = xmin + (xmax - xmin) * i / n_ticks;
        const double y = ymin + (ymax - ymin) * i / n_ticks;
        out << "<line x1='" << px(x) << "' y1='" << H - B << "' x2='" << px(x) << "' y2='"
            << H - B + 5 << "' stroke='black'/>\n";
        out << "<text x='" << px(x) << "' y='" << H - B + 20
            << "' text-anchor='middle' font-size='11'>" << x << "</text>\n";
        out << "<line x1='" << L - 5 << "' y1='" << py(y) << "' x2='" << L << "' y2='" << py(y)
            << "' stroke='black'/>\n";
        out << "<text x='" << L - 8 << "' y='" << py(y) + 4
            << "' text-anchor='end' font-size='11'>" << y << "</text>\n";
    }
    out << "<text x='" << (L + W - R) / 2 << "' y='" << H - 12
        << "' text-anchor='middle' font-size='13'>" << xlabel << "</text>\n";

    double legend_y = T + 8;
    for (const auto& c : curves) {
        out << "<polyline fill='none' stroke='" << c.color << "' stroke-width='1.5' points='";
        for (std::size_t i = 0; i < c.xs.size(); ++i)
            out << px(c.xs[i]) << "," << py(c.ys[i]) << " ";
        out << "'/>\n";
        out << "<line x1='" << W - R - 150 << "' y1='" << legend_y << "' x2='" << W - R - 125
            << "' y2='" << legend_y << "' stroke='" << c.color << "' stroke-width='2'/>\n";
        out << "<text x='" << W - R - 120 << "' y='" << legend_y + 4 << "' font-size='12'>"
            << c.label << "</text>\n";
        legend_y += 16;
    }
    out << "</svg>\n";
}

}  // namespace cqsim
