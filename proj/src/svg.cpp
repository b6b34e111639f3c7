#include "axomap/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace axomap {

namespace {

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::string escape(const std::string& s)
{
    std::string out;
    for (const char c : s) {
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

constexpr double kWidth = 640, kHeight = 480;
constexpr double kLeft = 70, kRight = 150, kTop = 40, kBottom = 50;

} // namespace

void write_scatter_svg(std::ostream& out, const std::string& title, const std::string& x_label, const std::string& y_label,
                       std::span<const SvgSeries> series)
{
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : series) {
        for (const auto& [x, y] : s.points) {
            if (std::isfinite(x) && std::isfinite(y)) {
                x0 = std::min(x0, x);
                x1 = std::max(x1, x);
                y0 = std::min(y0, y);
                y1 = std::max(y1, y);
            }
        }
    }
    if (!(x0 <= x1)) {
        x0 = y0 = 0;
        x1 = y1 = 1;
    }
    if (x1 == x0) {
        x1 = x0 + 1;
    }
    if (y1 == y0) {
        y1 = y0 + 1;
    }
    const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
    auto sx = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
    auto sy = [&](double y) { return kTop + ph - (y - y0) / (y1 - y0) * ph; };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << num(kWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
        << "</text>\n";
    out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double fx = x0 + (x1 - x0) * k / 4, fy = y0 + (y1 - y0) * k / 4;
        out << "<text x=\"" << num(sx(fx)) << "\" y=\"" << num(kTop + ph + 16) << "\" text-anchor=\"middle\">" << tick(fx)
            << "</text>\n";
        out << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(sy(fy) + 4) << "\" text-anchor=\"end\">" << tick(fy)
            << "</text>\n";
    }
    out << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kHeight - 10) << "\" text-anchor=\"middle\">"
        << escape(x_label) << "</text>\n";
    out << "<text transform=\"translate(16," << num(kTop + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
        << escape(y_label) << "</text>\n";

    double ly = kTop + 10;
    for (const auto& s : series) {
        if (s.connect && s.points.size() > 1) {
            out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" points=\"";
            for (const auto& [x, y] : s.points) {
                out << num(sx(x)) << ',' << num(sy(y)) << ' ';
            }
            out << "\"/>\n";
        }
        for (const auto& [x, y] : s.points) {
            if (std::isfinite(x) && std::isfinite(y)) {
                out << "<circle cx=\"" << num(sx(x)) << "\" cy=\"" << num(sy(y)) << "\" r=\"3\" fill=\"" << s.color
                    << "\" fill-opacity=\"0.7\"/>\n";
            }
        }
        out << "<circle cx=\"" << num(kWidth - kRight + 14) << "\" cy=\"" << num(ly) << "\" r=\"4\" fill=\"" << s.color
            << "\"/>\n";
        out << "<text x=\"" << num(kWidth - kRight + 24) << "\" y=\"" << num(ly + 4) << "\">" << escape(s.label)
            << "</text>\n";
        ly += 16;
    }
    out << "</svg>\n";
}

void write_heatmap_svg(std::ostream& out, const std::string& title, int n, std::span<const double> values, double vmin,
                       double vmax)
{
    const double cell = std::max(4.0, std::min(40.0, 480.0 / std::max(1, n)));
    const double left = 40, top = 40;
    const double w = left + cell * n + 20, h = top + cell * n + 20;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w) << "\" height=\"" << num(h)
        << "\" font-family=\"sans-serif\" font-size=\"10\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << num(w / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"13\">" << escape(title)
        << "</text>\n";
    const double span = vmax > vmin ? vmax - vmin : 1.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double v = values[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)];
            const double t = std::clamp((v - vmin) / span, 0.0, 1.0);
            const int r = static_cast<int>(std::lround(255 - t * (255 - 8)));
            const int g = static_cast<int>(std::lround(255 - t * (255 - 48)));
            const int b = static_cast<int>(std::lround(255 - t * (255 - 107)));
            char color[8];
            std::snprintf(color, sizeof color, "#%02x%02x%02x", r, g, b);
            out << "<rect x=\"" << num(left + j * cell) << "\" y=\"" << num(top + i * cell) << "\" width=\"" << num(cell)
                << "\" height=\"" << num(cell) << "\" fill=\"" << color << "\"><title>(" << i << ',' << j << ") "
                << tick(v) << "</title></rect>\n";
        }
        if (cell >= 10) {
            out << "<text x=\"" << num(left - 4) << "\" y=\"" << num(top + i * cell + cell / 2 + 3)
                << "\" text-anchor=\"end\">" << i << "</text>\n";
            out << "<text x=\"" << num(left + i * cell + cell / 2) << "\" y=\"" << num(top - 4)
                << "\" text-anchor=\"middle\">" << i << "</text>\n";
        }
    }
    out << "</svg>\n";
}

} // namespace axomap
