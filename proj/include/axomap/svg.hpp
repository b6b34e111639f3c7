#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace axomap {

struct SvgSeries {
    std::string label;
    std::string color = "#1f77b4";
    std::vector<std::pair<double, double>> points;
    bool connect = false; ///< draw a polyline through the points in order
};

/// Static scatter / line plot with linear axes fitted to the data.
void write_scatter_svg(std::ostream& out, const std::string& title, const std::string& x_label, const std::string& y_label,
                       std::span<const SvgSeries> series);

/// n x n heatmap of row-major values, white at vmin to dark blue at vmax.
void write_heatmap_svg(std::ostream& out, const std::string& title, int n, std::span<const double> values, double vmin,
                       double vmax);

} // namespace axomap
