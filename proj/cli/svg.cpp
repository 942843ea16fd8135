#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "gpsl/errors.hpp"

namespace gpsl::cli {

namespace {

constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 20;
constexpr int kMarginTop = 40;
constexpr int kMarginBottom = 50;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                "#9467bd", "#ff7f0e", "#8c564b"};
constexpr int kPaletteSize = 6;

std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
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

std::string fmt(const char* pattern, double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

struct Range {
    double lo = 0.0;
    double hi = 1.0;
};

/// Chooses a tick step of the form {1,2,5}*10^k giving 4..9 intervals.
double nice_step(double span) {
    const double raw = span / 6.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double frac = raw / mag;
    double mult = 10.0;
    if (frac <= 1.0) {
        mult = 1.0;
    } else if (frac <= 2.0) {
        mult = 2.0;
    } else if (frac <= 5.0) {
        mult = 5.0;
    }
    return mult * mag;
}

std::vector<double> linear_ticks(const Range& r) {
    std::vector<double> ticks;
    const double step = nice_step(r.hi - r.lo);
    const double first = std::ceil(r.lo / step - 1e-9) * step;
    for (double t = first; t <= r.hi + step * 1e-9; t += step) {
        ticks.push_back(std::abs(t) < step * 1e-6 ? 0.0 : t);
    }
    return ticks;
}

std::vector<double> decade_ticks(const Range& r) {
    std::vector<double> ticks;
    const int lo = static_cast<int>(std::ceil(r.lo - 1e-9));
    const int hi = static_cast<int>(std::floor(r.hi + 1e-9));
    for (int e = lo; e <= hi; ++e) ticks.push_back(static_cast<double>(e));
    if (ticks.empty()) ticks.push_back(0.5 * (r.lo + r.hi));
    return ticks;
}

std::string tick_label(double v, bool log_axis) {
    if (log_axis) {
        const double value = std::pow(10.0, v);
        if (v >= -4.0 && v <= 5.0 && v == std::floor(v)) return fmt("%g", value);
        return fmt("1e%+03.0f", v);
    }
    return fmt("%g", v);
}

}  // namespace

void write_line_plot(const std::string& path, const std::vector<Series>& series,
                     const PlotOptions& options) {
    const int width = options.width;
    const int height = options.height;
    const double plot_left = kMarginLeft;
    const double plot_right = width - kMarginRight;
    const double plot_top = kMarginTop;
    const double plot_bottom = height - kMarginBottom;

    // Data ranges. On a log y axis work in log10(y) and ignore y <= 0.
    Range xr{std::numeric_limits<double>::infinity(),
             -std::numeric_limits<double>::infinity()};
    Range yr = xr;
    for (const auto& s : series) {
        const std::size_t n = std::min(s.x.size(), s.y.size());
        for (std::size_t i = 0; i < n; ++i) {
            const double x = s.x[i];
            double y = s.y[i];
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            if (options.log_y) {
                if (y <= 0.0) continue;
                y = std::log10(y);
            }
            xr.lo = std::min(xr.lo, x);
            xr.hi = std::max(xr.hi, x);
            yr.lo = std::min(yr.lo, y);
            yr.hi = std::max(yr.hi, y);
        }
    }
    if (!std::isfinite(xr.lo) || !std::isfinite(yr.lo)) {
        xr = {0.0, 1.0};
        yr = {0.0, 1.0};
    }
    auto widen = [](Range& r, double pad_frac) {
        if (r.hi <= r.lo) {
            const double bump = std::max(1.0, std::abs(r.lo)) * 0.5;
            r.lo -= bump;
            r.hi += bump;
        } else {
            const double pad = (r.hi - r.lo) * pad_frac;
            r.lo -= pad;
            r.hi += pad;
        }
    };
    widen(xr, 0.02);
    widen(yr, 0.05);

    auto sx = [&](double x) {
        return plot_left + (x - xr.lo) / (xr.hi - xr.lo) * (plot_right - plot_left);
    };
    auto sy = [&](double y) {
        return plot_bottom - (y - yr.lo) / (yr.hi - yr.lo) * (plot_bottom - plot_top);
    };

    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot create output file: " + path);

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
        << height << "\">\n";
    out << "<rect width=\"" << width << "\" height=\"" << height
        << "\" fill=\"#ffffff\"/>\n";
    out << "<g font-family=\"Helvetica,Arial,sans-serif\" font-size=\"13\" "
           "fill=\"#222222\">\n";

    // Grid and ticks.
    const std::vector<double> xticks = linear_ticks(xr);
    const std::vector<double> yticks =
        options.log_y ? decade_ticks(yr) : linear_ticks(yr);
    out << "<g stroke=\"#dddddd\" stroke-width=\"1\">\n";
    for (double t : xticks) {
        const double px = sx(t);
        out << "<line x1=\"" << fmt("%.2f", px) << "\" y1=\""
            << fmt("%.2f", plot_top) << "\" x2=\"" << fmt("%.2f", px)
            << "\" y2=\"" << fmt("%.2f", plot_bottom) << "\"/>\n";
    }
    for (double t : yticks) {
        const double py = sy(t);
        out << "<line x1=\"" << fmt("%.2f", plot_left) << "\" y1=\""
            << fmt("%.2f", py) << "\" x2=\"" << fmt("%.2f", plot_right)
            << "\" y2=\"" << fmt("%.2f", py) << "\"/>\n";
    }
    out << "</g>\n";

    for (double t : xticks) {
        const double px = sx(t);
        out << "<text x=\"" << fmt("%.2f", px) << "\" y=\""
            << fmt("%.2f", plot_bottom + 18.0)
            << "\" text-anchor=\"middle\">" << xml_escape(tick_label(t, false))
            << "</text>\n";
    }
    for (double t : yticks) {
        const double py = sy(t);
        out << "<text x=\"" << fmt("%.2f", plot_left - 8.0) << "\" y=\""
            << fmt("%.2f", py + 4.0) << "\" text-anchor=\"end\">"
            << xml_escape(tick_label(t, options.log_y)) << "</text>\n";
    }

    // Frame.
    out << "<rect x=\"" << plot_left << "\" y=\"" << plot_top << "\" width=\""
        << plot_right - plot_left << "\" height=\"" << plot_bottom - plot_top
        << "\" fill=\"none\" stroke=\"#222222\" stroke-width=\"1\"/>\n";

    // Series polylines, split at gaps.
    int color_index = 0;
    for (const auto& s : series) {
        const char* color = kPalette[color_index % kPaletteSize];
        ++color_index;
        out << "<g fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"1.8\"";
        if (s.dashed) out << " stroke-dasharray=\"7 4\"";
        out << ">\n";
        const std::size_t n = std::min(s.x.size(), s.y.size());
        std::string d;
        bool open = false;
        auto flush = [&]() {
            if (open && d.find('L') != std::string::npos)
                out << "<path d=\"" << d << "\"/>\n";
            d.clear();
            open = false;
        };
        for (std::size_t i = 0; i < n; ++i) {
            const double x = s.x[i];
            double y = s.y[i];
            const bool ok = std::isfinite(x) && std::isfinite(y) &&
                            (!options.log_y || y > 0.0);
            if (!ok) {
                flush();
                continue;
            }
            if (options.log_y) y = std::log10(y);
            d += (open ? "L" : "M") + fmt("%.2f", sx(x)) + " " + fmt("%.2f", sy(y));
            open = true;
        }
        flush();
        out << "</g>\n";
    }

    // Legend, top right inside the frame.
    const double legend_x = plot_right - 210.0;
    double legend_y = plot_top + 14.0;
    color_index = 0;
    for (const auto& s : series) {
        const char* color = kPalette[color_index % kPaletteSize];
        ++color_index;
        if (s.label.empty()) continue;
        out << "<line x1=\"" << fmt("%.2f", legend_x) << "\" y1=\""
            << fmt("%.2f", legend_y - 4.0) << "\" x2=\""
            << fmt("%.2f", legend_x + 28.0) << "\" y2=\""
            << fmt("%.2f", legend_y - 4.0) << "\" stroke=\"" << color
            << "\" stroke-width=\"1.8\"";
        if (s.dashed) out << " stroke-dasharray=\"7 4\"";
        out << "/>\n";
        out << "<text x=\"" << fmt("%.2f", legend_x + 34.0) << "\" y=\""
            << fmt("%.2f", legend_y) << "\">" << xml_escape(s.label)
            << "</text>\n";
        legend_y += 18.0;
    }

    // Title and axis labels.
    if (!options.title.empty()) {
        out << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
               "font-size=\"16\">"
            << xml_escape(options.title) << "</text>\n";
    }
    if (!options.x_label.empty()) {
        out << "<text x=\"" << (plot_left + plot_right) / 2.0 << "\" y=\""
            << height - 12 << "\" text-anchor=\"middle\">"
            << xml_escape(options.x_label) << "</text>\n";
    }
    if (!options.y_label.empty()) {
        const double cy = (plot_top + plot_bottom) / 2.0;
        out << "<text x=\"18\" y=\"" << fmt("%.2f", cy)
            << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
            << fmt("%.2f", cy) << ")\">" << xml_escape(options.y_label)
            << "</text>\n";
    }

    out << "</g>\n</svg>\n";
}

}  // namespace gpsl::cli
