#include "todalab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "todalab/solution_io.hpp"

namespace todalab::io {

namespace {

struct Rgb {
    double r, g, b;
};

// Five-stop dark-to-bright map, interpolated linearly.
constexpr Rgb kStops[5] = {{0.267, 0.005, 0.329},
                           {0.231, 0.322, 0.545},
                           {0.129, 0.567, 0.551},
                           {0.369, 0.788, 0.382},
                           {0.993, 0.906, 0.144}};

std::string color_at(double t) {
    t = std::clamp(t, 0.0, 1.0);
    double pos = t * 4.0;
    int lo = std::min(3, static_cast<int>(pos));
    double frac = pos - lo;
    auto mix = [&](double a, double b) { return a + (b - a) * frac; };
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x",
                  static_cast<int>(std::lround(255.0 * mix(kStops[lo].r, kStops[lo + 1].r))),
                  static_cast<int>(std::lround(255.0 * mix(kStops[lo].g, kStops[lo + 1].g))),
                  static_cast<int>(std::lround(255.0 * mix(kStops[lo].b, kStops[lo + 1].b))));
    return buf;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

} // namespace

void write_heatmap_svg(const std::filesystem::path& path, const Grid2D& grid,
                       const std::vector<double>& values, const std::string& title) {
    double vmin = std::numeric_limits<double>::infinity();
    double vmax = -std::numeric_limits<double>::infinity();
    for (double v : values) {
        if (std::isfinite(v)) {
            vmin = std::min(vmin, v);
            vmax = std::max(vmax, v);
        }
    }
    if (!(vmax >= vmin)) { vmin = 0.0; vmax = 1.0; }
    double span = (vmax > vmin) ? vmax - vmin : 1.0;

    const int cell = 4;
    int w = grid.nx() * cell, h = grid.ny() * cell;
    int legend_w = 70;
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << (w + legend_w + 20)
        << "\" height=\"" << (h + 30) << "\">\n";
    out << "<text x=\"4\" y=\"14\" font-family=\"monospace\" font-size=\"12\">" << title
        << "</text>\n";
    out << "<g transform=\"translate(0,22)\">\n";
    for (int j = 0; j < grid.ny(); ++j) {
        for (int i = 0; i < grid.nx(); ++i) {
            double v = values[grid.index(i, j)];
            if (!std::isfinite(v)) continue;
            // y axis points up in the plane, down in SVG
            out << "<rect x=\"" << i * cell << "\" y=\"" << (grid.ny() - 1 - j) * cell
                << "\" width=\"" << cell << "\" height=\"" << cell << "\" fill=\""
                << color_at((v - vmin) / span) << "\"/>\n";
        }
    }
    // legend: vertical gradient bar with min/max labels
    int bar_x = w + 14;
    for (int s = 0; s < 64; ++s) {
        double t = 1.0 - static_cast<double>(s) / 63.0;
        out << "<rect x=\"" << bar_x << "\" y=\"" << s * (h / 64.0) << "\" width=\"12\" height=\""
            << (h / 64.0 + 0.5) << "\" fill=\"" << color_at(t) << "\"/>\n";
    }
    out << "<text x=\"" << (bar_x + 16) << "\" y=\"10\" font-family=\"monospace\" font-size=\"10\">"
        << fmt(vmax) << "</text>\n";
    out << "<text x=\"" << (bar_x + 16) << "\" y=\"" << (h - 2)
        << "\" font-family=\"monospace\" font-size=\"10\">" << fmt(vmin) << "</text>\n";
    out << "</g>\n</svg>\n";
    write_file_atomic(path, out.str());
}

} // namespace todalab::io
