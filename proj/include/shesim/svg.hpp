#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "shesim/stability.hpp"

// Minimal self-contained SVG output: polyline plots with axes and an
// optional log-scale y axis, plus the stability-region heatmap with the
// analytic boundary curve overlaid. No plotting dependency.

namespace shesim::svg {

struct Series {
    std::vector<double> xs, ys;
    std::string color = "#1f6fb2";
    std::string label;
};

namespace detail {

constexpr int kWidth = 760, kHeight = 520;
constexpr int kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;

inline std::string num(double v) {
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
}

inline std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    return out;
}

}  // namespace detail

inline void line_plot(const std::filesystem::path& path, const std::vector<Series>& series,
                      const std::string& title, const std::string& xlabel,
                      const std::string& ylabel, bool log_y = false) {
    using namespace detail;
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = std::numeric_limits<double>::infinity(), ymax = -ymin;
    for (const Series& s : series)
        for (std::size_t i = 0; i < s.xs.size(); ++i) {
            const double y = log_y ? (s.ys[i] > 0.0 ? std::log10(s.ys[i])
                                                    : std::numeric_limits<double>::quiet_NaN())
                                   : s.ys[i];
            if (!std::isfinite(y)) continue;
            xmin = std::min(xmin, s.xs[i]);
            xmax = std::max(xmax, s.xs[i]);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    if (!(xmax > xmin)) xmax = xmin + 1.0;
    if (!(ymax > ymin)) ymax = ymin + 1.0;

    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * plot_w; };
    auto py = [&](double y) { return kTop + plot_h - (y - ymin) / (ymax - ymin) * plot_h; };

    std::ofstream out = open_out(path);
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kWidth << "' height='" << kHeight
        << "'>\n<rect width='100%' height='100%' fill='white'/>\n";
    out << "<text x='" << kWidth / 2 << "' y='24' text-anchor='middle' font-size='16'>" << title
        << "</text>\n";

    // Axes with four ticks per side.
    out << "<line x1='" << kLeft << "' y1='" << kTop + plot_h << "' x2='" << kLeft + plot_w
        << "' y2='" << kTop + plot_h << "' stroke='black'/>\n";
    out << "<line x1='" << kLeft << "' y1='" << kTop << "' x2='" << kLeft << "' y2='"
        << kTop + plot_h << "' stroke='black'/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double fx = xmin + (xmax - xmin) * i / 4.0;
        const double fy = ymin + (ymax - ymin) * i / 4.0;
        out << "<text x='" << px(fx) << "' y='" << kTop + plot_h + 18
            << "' text-anchor='middle' font-size='11'>" << num(fx) << "</text>\n";
        out << "<text x='" << kLeft - 8 << "' y='" << py(fy) + 4
            << "' text-anchor='end' font-size='11'>" << (log_y ? "1e" + num(fy) : num(fy))
            << "</text>\n";
    }
    out << "<text x='" << kLeft + plot_w / 2 << "' y='" << kHeight - 12
        << "' text-anchor='middle' font-size='13'>" << xlabel << "</text>\n";
    out << "<text x='18' y='" << kTop + plot_h / 2
        << "' text-anchor='middle' font-size='13' transform='rotate(-90 18 "
        << kTop + plot_h / 2 << ")'>" << ylabel << (log_y ? " (log scale)" : "") << "</text>\n";

    int label_row = 0;
    for (const Series& s : series) {
        out << "<polyline fill='none' stroke='" << s.color << "' stroke-width='1.5' points='";
        for (std::size_t i = 0; i < s.xs.size(); ++i) {
            const double y = log_y ? (s.ys[i] > 0.0 ? std::log10(s.ys[i])
                                                    : std::numeric_limits<double>::quiet_NaN())
                                   : s.ys[i];
            if (!std::isfinite(y)) continue;
            out << px(s.xs[i]) << ',' << py(y) << ' ';
        }
        out << "'/>\n";
        if (!s.label.empty()) {
            const int ly = kTop + 14 + 16 * label_row++;
            out << "<line x1='" << kLeft + plot_w - 150 << "' y1='" << ly << "' x2='"
                << kLeft + plot_w - 125 << "' y2='" << ly << "' stroke='" << s.color
                << "' stroke-width='2'/>\n";
            out << "<text x='" << kLeft + plot_w - 118 << "' y='" << ly + 4
                << "' font-size='12'>" << s.label << "</text>\n";
        }
    }
    out << "</svg>\n";
}

// Heatmap of the numeric-stable set with the analytic region shaded and
// its boundary beta0 = beta1^2 kappa / 2 - lambda1 drawn on top.
inline void region_heatmap(const std::filesystem::path& path, const RegionGrid& grid,
                           const std::string& title) {
    using namespace detail;
    const double x0 = grid.beta1s.front(), x1 = grid.beta1s.back();
    const double y0 = grid.beta0s.front(), y1 = grid.beta0s.back();
    const double xspan = x1 > x0 ? x1 - x0 : 1.0;
    const double yspan = y1 > y0 ? y1 - y0 : 1.0;
    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (x - x0) / xspan * plot_w; };
    auto py = [&](double y) { return kTop + plot_h - (y - y0) / yspan * plot_h; };
    const double cw = plot_w / static_cast<double>(grid.beta1s.size());
    const double ch = plot_h / static_cast<double>(grid.beta0s.size());

    std::ofstream out = open_out(path);
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kWidth << "' height='" << kHeight
        << "'>\n<rect width='100%' height='100%' fill='white'/>\n";
    out << "<text x='" << kWidth / 2 << "' y='24' text-anchor='middle' font-size='16'>" << title
        << "</text>\n";
    for (std::size_t i0 = 0; i0 < grid.beta0s.size(); ++i0)
        for (std::size_t i1 = 0; i1 < grid.beta1s.size(); ++i1) {
            const std::size_t c = grid.idx(static_cast<int>(i0), static_cast<int>(i1));
            const char* fill = grid.numeric_stable[c]
                                   ? (grid.analytic_stable[c] ? "#d62728" : "#ffd24d")
                                   : "#f2f2f2";
            out << "<rect x='" << px(grid.beta1s[i1]) - cw / 2 << "' y='"
                << py(grid.beta0s[i0]) - ch / 2 << "' width='" << cw << "' height='" << ch
                << "' fill='" << fill << "'/>\n";
        }
    if (std::isfinite(grid.kappa)) {
        out << "<polyline fill='none' stroke='black' stroke-width='2' points='";
        for (int i = 0; i <= 200; ++i) {
            const double b1 = x0 + xspan * i / 200.0;
            const double b0 = b1 * b1 * grid.kappa / 2.0 - grid.lambda1;
            if (b0 < y0 || b0 > y1) continue;
            out << px(b1) << ',' << py(b0) << ' ';
        }
        out << "'/>\n";
    }
    out << "<text x='" << kLeft + plot_w / 2 << "' y='" << kHeight - 12
        << "' text-anchor='middle' font-size='13'>beta1</text>\n";
    out << "<text x='18' y='" << kTop + plot_h / 2
        << "' text-anchor='middle' font-size='13' transform='rotate(-90 18 "
        << kTop + plot_h / 2 << ")'>beta0</text>\n";
    out << "<text x='" << kLeft << "' y='" << kTop - 6 << "' font-size='12'>red: analytic+numeric"
        << "  yellow: numeric only  grey: unstable  line: analytic boundary</text>\n";
    out << "</svg>\n";
}

}  // namespace shesim::svg
