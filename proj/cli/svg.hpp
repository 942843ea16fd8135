#pragma once

#include <string>
#include <vector>

namespace gpsl::cli {

/// One polyline on a plot. Points with non-finite coordinates (or, on a
/// logarithmic y axis, y <= 0) break the line into separate segments.
struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    bool dashed = false;
};

struct PlotOptions {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_y = false;
    int width = 880;
    int height = 560;
};

/// Writes a static, self-contained SVG line plot (no scripts, no external
/// references). Axis ticks are chosen from the 1-2-5 decades on linear axes
/// and at powers of ten on logarithmic axes.
void write_line_plot(const std::string& path, const std::vector<Series>& series,
                     const PlotOptions& options);

}  // namespace gpsl::cli
