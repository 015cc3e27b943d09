#pragma once

// Minimal static SVG line charts: one or more panels stacked vertically, each
// with a log or linear y axis, tick labels and a legend.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "lanczos_opt/errors.hpp"

namespace lanczos_opt {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    bool dashed = false;
};

struct Panel {
    std::string title;
    std::string x_label = "m";
    std::string y_label;
    bool log_y = true;
    std::vector<Series> series;
    /// Horizontal reference lines drawn in grey, e.g. a band for a ratio.
    std::vector<double> reference_lines;
};

namespace detail {

inline std::string svg_escape(const std::string& s) {
    std::string out;
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

inline std::string num(double v) {
    std::ostringstream os;
    os.precision(2);
    os << std::fixed << v;
    return os.str();
}

inline const char* palette(std::size_t i) {
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"};
    return colors[i % 8];
}

inline std::string tick_label(double v, bool log_y) {
    std::ostringstream os;
    if (log_y) {
        os << "1e" << static_cast<int>(std::lround(v));
    } else {
        os.precision(3);
        os << v;
    }
    return os.str();
}

inline void draw_panel(std::ostream& os, const Panel& p, double ox, double oy, double w, double h) {
    const double left = 70, right = 170, top = 30, bottom = 45;
    const double pw = w - left - right;
    const double ph = h - top - bottom;
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
    auto ty = [&](double y) { return p.log_y ? std::log10(y) : y; };
    auto usable = [&](double y) { return std::isfinite(y) && (!p.log_y || y > 0.0); };
    for (const auto& s : p.series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!usable(s.y[i])) continue;
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, ty(s.y[i]));
            ymax = std::max(ymax, ty(s.y[i]));
        }
    for (double r : p.reference_lines)
        if (usable(r)) {
            ymin = std::min(ymin, ty(r));
            ymax = std::max(ymax, ty(r));
        }
    if (!std::isfinite(xmin)) {
        xmin = 0;
        xmax = 1;
        ymin = 0;
        ymax = 1;
    }
    if (xmax == xmin) xmax = xmin + 1;
    if (p.log_y) {
        ymin = std::floor(ymin);
        ymax = std::ceil(ymax);
    }
    if (ymax == ymin) {
        ymin -= 1;
        ymax += 1;
    }
    auto px = [&](double x) { return ox + left + (x - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double y) { return oy + top + (1.0 - (y - ymin) / (ymax - ymin)) * ph; };

    os << "<text x=\"" << num(ox + left + pw / 2) << "\" y=\"" << num(oy + 18)
       << "\" text-anchor=\"middle\" font-size=\"14\">" << svg_escape(p.title) << "</text>\n";
    os << "<rect x=\"" << num(ox + left) << "\" y=\"" << num(oy + top) << "\" width=\"" << num(pw) << "\" height=\""
       << num(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";

    std::vector<double> yticks;
    if (p.log_y) {
        const int span = static_cast<int>(ymax - ymin);
        const int step = std::max(1, span / 8);
        for (int e = static_cast<int>(ymin); e <= static_cast<int>(ymax); e += step) yticks.push_back(e);
    } else {
        for (int i = 0; i <= 5; ++i) yticks.push_back(ymin + (ymax - ymin) * i / 5.0);
    }
    for (double t : yticks) {
        os << "<line x1=\"" << num(ox + left) << "\" x2=\"" << num(ox + left + pw) << "\" y1=\"" << num(py(t)) << "\" y2=\""
           << num(py(t)) << "\" stroke=\"#e0e0e0\"/>\n";
        os << "<text x=\"" << num(ox + left - 6) << "\" y=\"" << num(py(t) + 4) << "\" text-anchor=\"end\" font-size=\"11\">"
           << tick_label(t, p.log_y) << "</text>\n";
    }
    const int xstep = std::max(1, static_cast<int>(std::ceil((xmax - xmin) / 10.0)));
    for (double t = std::ceil(xmin); t <= xmax; t += xstep)
        os << "<text x=\"" << num(px(t)) << "\" y=\"" << num(oy + top + ph + 16) << "\" text-anchor=\"middle\" font-size=\"11\">"
           << tick_label(t, false) << "</text>\n";
    os << "<text x=\"" << num(ox + left + pw / 2) << "\" y=\"" << num(oy + h - 8) << "\" text-anchor=\"middle\" font-size=\"12\">"
       << svg_escape(p.x_label) << "</text>\n";
    os << "<text transform=\"translate(" << num(ox + 16) << "," << num(oy + top + ph / 2)
       << ") rotate(-90)\" text-anchor=\"middle\" font-size=\"12\">" << svg_escape(p.y_label) << "</text>\n";

    for (double r : p.reference_lines)
        if (usable(r))
            os << "<line x1=\"" << num(ox + left) << "\" x2=\"" << num(ox + left + pw) << "\" y1=\"" << num(py(ty(r)))
               << "\" y2=\"" << num(py(ty(r))) << "\" stroke=\"#999999\" stroke-dasharray=\"2,3\"/>\n";

    for (std::size_t k = 0; k < p.series.size(); ++k) {
        const auto& s = p.series[k];
        std::string path;
        bool pen_down = false;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!usable(s.y[i])) {
                pen_down = false;
                continue;
            }
            path += (pen_down ? " L " : " M ") + num(px(s.x[i])) + " " + num(py(ty(s.y[i])));
            pen_down = true;
        }
        os << "<path d=\"" << path << "\" fill=\"none\" stroke=\"" << palette(k) << "\" stroke-width=\"1.6\""
           << (s.dashed ? " stroke-dasharray=\"6,3\"" : "") << "/>\n";
        const double ly = oy + top + 14 + 18.0 * static_cast<double>(k);
        const double lx = ox + left + pw + 12;
        os << "<line x1=\"" << num(lx) << "\" x2=\"" << num(lx + 24) << "\" y1=\"" << num(ly) << "\" y2=\"" << num(ly)
           << "\" stroke=\"" << palette(k) << "\" stroke-width=\"1.6\"" << (s.dashed ? " stroke-dasharray=\"6,3\"" : "")
           << "/>\n";
        os << "<text x=\"" << num(lx + 30) << "\" y=\"" << num(ly + 4) << "\" font-size=\"11\">" << svg_escape(s.label)
           << "</text>\n";
    }
}

}  // namespace detail

inline std::string render_svg(const std::vector<Panel>& panels, double width = 760, double panel_height = 380) {
    std::ostringstream os;
    const double height = panel_height * static_cast<double>(panels.size());
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << detail::num(width) << "\" height=\"" << detail::num(height)
       << "\" viewBox=\"0 0 " << detail::num(width) << " " << detail::num(height) << "\" font-family=\"sans-serif\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (std::size_t i = 0; i < panels.size(); ++i)
        detail::draw_panel(os, panels[i], 0, panel_height * static_cast<double>(i), width, panel_height);
    os << "</svg>\n";
    return os.str();
}

inline void write_svg(const std::filesystem::path& path, const std::vector<Panel>& panels) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << render_svg(panels);
}

}  // namespace lanczos_opt
